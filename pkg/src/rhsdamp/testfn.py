"""Test functions of the classes D (compact support), Z = F[D] and S.

Every :class:`TestFunction` is an immutable bundle of a vectorised
evaluator and a jet oracle that yields exact Taylor coefficients at any
point, plus the metadata the pairing code needs (support, class tag,
radius of convergence of the Taylor series at the origin, a characteristic
length for panel sizing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from . import quad
from .errors import (
    CapabilityError,
    ClassViolationError,
    InvalidIntervalError,
    InvalidParameterError,
)
from .jet import DEFAULT_MAX_ORDER, Jet

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Compact:
    lo: float
    hi: float


@dataclass(frozen=True)
class RapidDecay:
    """``extent``: beyond ``|x| > extent`` the function is negligible (< ~1e-16 relative)."""

    extent: float


Support = Union[Compact, RapidDecay]


@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    evaluator: Callable[[np.ndarray], np.ndarray]
    jet_oracle: Callable[[np.ndarray, int], Jet]
    support: Support
    class_tag: str
    description: str
    max_order: int = DEFAULT_MAX_ORDER
    radius0: float = math.inf
    scale: float = 1.0
    spec: dict = field(default_factory=dict)
    knots: tuple = ()  # interior points where f is smooth but not analytic

    def __post_init__(self):
        if self.class_tag not in ("D", "Z", "S"):
            raise InvalidParameterError(f"unknown class tag {self.class_tag!r}")
        if self.class_tag == "D" and not isinstance(self.support, Compact):
            raise InvalidParameterError("class D requires compact support")
        if self.class_tag == "Z" and not isinstance(self.support, RapidDecay):
            raise InvalidParameterError("class Z requires rapid-decay support")

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        out = np.asarray(self.evaluator(np.atleast_1d(np.asarray(x, dtype=float))), dtype=complex)
        return complex(out[0]) if scalar else out

    def jet(self, x, order):
        if order > self.max_order:
            raise CapabilityError(
                f"{self.description}: jet order {order} exceeds capability {self.max_order}")
        return self.jet_oracle(np.asarray(x, dtype=float), order)

    def taylor0(self, order):
        """Taylor coefficients at 0 as a 1-d complex array of length order+1."""
        return np.asarray(self.jet(0.0, order).coeffs, dtype=complex).reshape(order + 1)

    @property
    def is_compact(self):
        return isinstance(self.support, Compact)

    @property
    def bounds(self):
        """Finite window outside of which the function vanishes (or is negligible)."""
        if self.is_compact:
            return self.support.lo, self.support.hi
        return -self.support.extent, self.support.extent

    def __repr__(self):
        return f"TestFunction({self.description}, class={self.class_tag})"


# ---------------------------------------------------------------------------
# bump functions (class D)


def _bump_radius(lo, hi):
    if lo < 0 < hi:
        return min(-lo, hi)
    return max(lo, -hi, 0.0)


def make_bump(lo, hi, amplitude=1.0):
    """``amplitude * exp(-1/(1-u^2))`` with ``u`` the affine image of ``[lo, hi]`` on ``[-1, 1]``."""
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise InvalidIntervalError(f"bump needs lo < hi, got [{lo}, {hi}]")
    if amplitude == 0:
        raise InvalidParameterError("bump amplitude must be nonzero")
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def evaluator(x):
        u = (x - mid) / half
        inside = np.abs(u) < 1.0
        out = np.zeros(x.shape, dtype=complex)
        ui = u[inside]
        out[inside] = amplitude * np.exp(-1.0 / (1.0 - ui * ui))
        return out

    def jet_oracle(x0, order):
        x0 = np.asarray(x0, dtype=float)
        u0 = (x0 - mid) / half
        inside = np.abs(u0) < 1.0
        safe = np.where(inside, x0, mid)
        u = (Jet.variable(safe, order) - mid) * (1.0 / half)
        j = ((1.0 - u * u).reciprocal() * -1.0).exp() * amplitude
        coeffs = np.where(inside, j.coeffs, 0.0)
        return Jet(x0, coeffs)

    return TestFunction(
        evaluator, jet_oracle, Compact(lo, hi), "D",
        f"bump({lo:g},{hi:g},{amplitude:g})",
        radius0=_bump_radius(lo, hi), scale=(hi - lo) / 16.0,
        spec={"kind": "bump", "lo": lo, "hi": hi, "amplitude": amplitude},
    )


# ---------------------------------------------------------------------------
# polynomial x Gaussian (class S)


def _poly_gauss(coeffs, sigma, description, spec):
    coeffs = np.asarray(coeffs, dtype=complex)
    inv = 1.0 / (2.0 * sigma * sigma)
    deg = coeffs.size - 1

    def evaluator(x):
        return np.polynomial.polynomial.polyval(x, coeffs) * np.exp(-inv * x * x)

    def jet_oracle(x0, order):
        X = Jet.variable(x0, order)
        p = Jet.constant(coeffs[-1], x0, order)
        for c in coeffs[-2::-1]:
            p = p * X + c
        return p * (X * X * (-inv)).exp()

    extent = sigma * max(12.0, 3.0 * math.sqrt(deg + 8.0))
    return TestFunction(evaluator, jet_oracle, RapidDecay(extent), "S", description,
                        radius0=math.inf, scale=sigma / 2.0, spec=spec)


def make_gauss_hermite(sigma, k=0):
    """``x^k exp(-x^2 / (2 sigma^2))``."""
    if not sigma > 0:
        raise InvalidParameterError("sigma must be positive")
    if k < 0 or int(k) != k:
        raise InvalidParameterError("k must be a non-negative integer")
    k = int(k)
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    return _poly_gauss(coeffs, float(sigma), f"gauss_hermite({sigma:g},{k})",
                       {"kind": "gauss_hermite", "sigma": float(sigma), "k": k})


def fourier_poly_gauss(f):
    """Closed-form unitary Fourier transform of a polynomial-times-Gaussian."""
    sp = f.spec
    if sp.get("kind") == "gauss_hermite":
        p = np.zeros(sp["k"] + 1, dtype=complex)
        p[-1] = 1.0
    elif sp.get("kind") == "poly_gauss":
        p = np.asarray(sp["coeffs"], dtype=complex)
    else:
        raise ClassViolationError(f"{f.description} is not a polynomial-Gaussian")
    s = sp["sigma"]
    P = np.polynomial.polynomial
    # F[x^j g] = (-i d/dk)^j (s e^{-s^2 k^2/2}) = (-i)^j Q_j(k) e^{-s^2 k^2/2}
    q = np.array([s], dtype=complex)
    out = np.zeros(p.size, dtype=complex)
    for j, pj in enumerate(p):
        term = pj * (-1j) ** j * q
        out[: term.size] += term
        q = P.polysub(P.polyder(q), P.polymulx(q) * s * s) if j + 1 < p.size else q
    out = np.trim_zeros(out, "b") if np.any(out) else np.zeros(1, dtype=complex)
    return _poly_gauss(out, 1.0 / s, f"F[{f.description}]",
                       {"kind": "poly_gauss", "coeffs": out.tolist(), "sigma": 1.0 / s})


# ---------------------------------------------------------------------------
# Fourier images of compactly supported functions (class Z)


def _rule_panels(lo, hi, kmax):
    width = hi - lo
    p = max(32, int(math.ceil(width * kmax / (2.0 * math.pi))))  # one wavelength per panel
    return 1 << (p - 1).bit_length()  # power of two keeps the cache small


def make_fourier_of(f, grid_spec=None):
    """``g(k) = (1/sqrt(2 pi)) int e^{ikx} f(x) dx`` for compactly supported ``f``.

    ``grid_spec`` may set ``{"min_panels": int, "order": int, "max_order": int}``.
    """
    if not f.is_compact:
        raise ClassViolationError(f"{f.description} is not compactly supported; Z = F[D]")
    grid_spec = dict(grid_spec or {})
    min_panels = int(grid_spec.get("min_panels", 32))
    order = int(grid_spec.get("order", 20))
    max_order = int(grid_spec.get("max_order", DEFAULT_MAX_ORDER))
    lo, hi = f.support.lo, f.support.hi

    @lru_cache(maxsize=32)
    def rule(panels):
        x, w = quad.panel_rule(np.linspace(lo, hi, panels + 1), order)
        return x, w * f(x) / SQRT_2PI

    def evaluator(k):
        k = np.asarray(k, dtype=float)
        out = np.empty(k.shape, dtype=complex)
        bins = np.array([max(min_panels, _rule_panels(lo, hi, abs(v))) for v in k.ravel()])
        flat = out.reshape(-1)
        kf = k.reshape(-1)
        for p in np.unique(bins):
            sel = np.nonzero(bins == p)[0]
            x, wf = rule(int(p))
            rows = max(1, min(2048, 4_000_000 // x.size))
            for start in range(0, sel.size, rows):
                s = sel[start:start + rows]
                flat[s] = np.exp(1j * np.outer(kf[s], x)) @ wf
        return out

    def jet_oracle(k0, jorder):
        k0 = np.asarray(k0, dtype=float)
        kf = np.atleast_1d(k0).reshape(-1)
        p = max(min_panels, _rule_panels(lo, hi, float(np.max(np.abs(kf))) if kf.size else 0.0))
        x, wf = rule(p)
        # (i x)^n / n! computed stably by a running product
        powers = np.empty((jorder + 1, x.size), dtype=complex)
        powers[0] = 1.0
        for m in range(1, jorder + 1):
            powers[m] = powers[m - 1] * (1j * x) / m
        phase = np.exp(1j * np.outer(kf, x)) * wf  # (npts, nodes)
        coeffs = powers @ phase.T  # (order+1, npts)
        return Jet(k0, coeffs.reshape((jorder + 1,) + k0.shape))

    amax = max(abs(lo), abs(hi))
    g = TestFunction(
        evaluator, jet_oracle, RapidDecay(1.0), "Z", f"F[{f.description}]",
        max_order=max_order, radius0=math.inf, scale=min(1.0, math.pi / amax),
        spec={"kind": "fourier_of", "child": f.spec},
    )
    extent = _decay_extent(g, f, amax)
    return TestFunction(g.evaluator, g.jet_oracle, RapidDecay(extent), "Z", g.description,
                        max_order=max_order, radius0=math.inf, scale=g.scale, spec=g.spec)


def _decay_extent(g, f, amax, rel=1e-15):
    """Smallest scanned |k| beyond which |g| stays below ``rel * int|f|`` (times 1.5).

    The scan also stops once the envelope stalls for four steps: that is the
    rounding floor of ``f`` itself, and going further only costs nodes.
    """
    lo, hi = f.support.lo, f.support.hi
    x, w = quad.panel_rule(np.linspace(lo, hi, 65), 20)
    mass = float(np.sum(w * np.abs(f(x)))) / SQRT_2PI
    if mass == 0.0:
        return 1.0
    period = 2 * math.pi / max(hi - lo, 1e-300)
    k = 4.0 * period
    best, stalled = math.inf, 0
    while k < 1e6:
        window = k + np.linspace(0.0, 2.0 * period, 24)
        env = np.max(np.abs(g.evaluator(np.concatenate([window, -window]))))
        if env < rel * mass:
            return 1.5 * k
        if env < 0.5 * best:
            best, stalled = env, 0
        else:
            stalled += 1
            if stalled >= 4:
                return 1.5 * k
        k *= 1.25
    return k


# ---------------------------------------------------------------------------
# combinators


def _union(a, b):
    if isinstance(a, Compact) and isinstance(b, Compact):
        return Compact(min(a.lo, b.lo), max(a.hi, b.hi))
    ea = a.extent if isinstance(a, RapidDecay) else max(abs(a.lo), abs(a.hi))
    eb = b.extent if isinstance(b, RapidDecay) else max(abs(b.lo), abs(b.hi))
    return RapidDecay(max(ea, eb))


def add(f, g):
    if f.class_tag == g.class_tag:
        tag = f.class_tag
    else:
        tag = "S"
    support = _union(f.support, g.support)
    if tag == "S" and isinstance(support, Compact):
        support = RapidDecay(max(abs(support.lo), abs(support.hi)))
    order = min(f.max_order, g.max_order)
    knots = set(f.knots) | set(g.knots)
    for h in (f, g):
        if h.is_compact:
            knots |= {h.support.lo, h.support.hi}
    return TestFunction(
        lambda x: f.evaluator(x) + g.evaluator(x),
        lambda x0, k: f.jet_oracle(x0, k) + g.jet_oracle(x0, k),
        support, tag, f"({f.description} + {g.description})",
        max_order=order, radius0=min(f.radius0, g.radius0), scale=min(f.scale, g.scale),
        spec={"kind": "sum", "children": [f.spec, g.spec]}, knots=tuple(sorted(knots)),
    )


def scale(f, c):
    c = complex(c)
    return TestFunction(
        lambda x: c * f.evaluator(x),
        lambda x0, k: f.jet_oracle(x0, k) * c,
        f.support, f.class_tag, f"{c:g}*{f.description}",
        max_order=f.max_order, radius0=f.radius0, scale=f.scale,
        spec={"kind": "scale", "factor": [c.real, c.imag], "child": f.spec}, knots=f.knots,
    )


def reflect(f):
    """``x -> f(-x)``."""
    def jet_oracle(x0, k):
        j = f.jet_oracle(-np.asarray(x0, dtype=float), k)
        return Jet(x0, j.scale_argument(-1.0))

    support = f.support
    if isinstance(support, Compact):
        support = Compact(-support.hi, -support.lo)
    return TestFunction(
        lambda x: f.evaluator(-x), jet_oracle, support, f.class_tag,
        f"P[{f.description}]", max_order=f.max_order, radius0=f.radius0, scale=f.scale,
        spec={"kind": "reflect", "child": f.spec}, knots=tuple(sorted(-k for k in f.knots)),
    )


def conjugate(f):
    return TestFunction(
        lambda x: np.conj(f.evaluator(x)),
        lambda x0, k: f.jet_oracle(x0, k).conj(),
        f.support, f.class_tag, f"conj[{f.description}]",
        max_order=f.max_order, radius0=f.radius0, scale=f.scale,
        spec={"kind": "conjugate", "child": f.spec}, knots=f.knots,
    )


def dilate(f, factor, prefactor=1.0):
    """``x -> prefactor * f(factor * x)`` for ``factor > 0``."""
    a = float(factor)
    if not a > 0:
        raise InvalidParameterError("dilation factor must be positive")
    c = complex(prefactor)

    def jet_oracle(x0, k):
        j = f.jet_oracle(a * np.asarray(x0, dtype=float), k)
        return Jet(x0, j.scale_argument(a) * c)

    support = f.support
    if isinstance(support, Compact):
        support = Compact(support.lo / a, support.hi / a)
    else:
        support = RapidDecay(support.extent / a)
    return TestFunction(
        lambda x: c * f.evaluator(a * x), jet_oracle, support, f.class_tag,
        f"{c:g}*{f.description}({a:g}x)", max_order=f.max_order,
        radius0=f.radius0 / a, scale=f.scale / a,
        spec={"kind": "dilate", "factor": a, "prefactor": [c.real, c.imag], "child": f.spec},
        knots=tuple(k / a for k in f.knots),
    )


# ---------------------------------------------------------------------------
# derived quantities


def derivative_at(f, x, n):
    """``f^(n)(x)`` from the exact jet."""
    if n < 0:
        raise InvalidParameterError("derivative order must be non-negative")
    if n > f.max_order:
        raise CapabilityError(f"{f.description}: derivative order {n} exceeds {f.max_order}")
    j = f.jet(x, n)
    val = j.derivative(n)
    return complex(val) if np.ndim(val) == 0 else val


def compact_rule(f, lo=None, hi=None, refine=1):
    """Composite Gauss-Legendre rule on ``[lo, hi]`` (default: the support of
    ``f``), graded towards the support ends and ``f.knots`` where a bump is
    flat but not analytic.  Relative accuracy is near machine precision for
    the smooth integrands built from ``f``."""
    s_lo, s_hi = f.bounds
    lo = s_lo if lo is None else lo
    hi = s_hi if hi is None else hi
    h = f.scale
    marks = np.array(sorted({s_lo, s_hi, *f.knots}))

    def step(x):
        d = np.min(np.abs(marks - x))
        return min(h, max(0.5 * d, 0.25 * h)) / refine

    cuts = sorted({lo, hi, *(k for k in f.knots if lo < k < hi)}
                  | ({0.0} if lo < 0.0 < hi else set()))
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        # grade from the middle outwards so both ends are refined symmetrically
        mid = 0.5 * (a + b)
        left = quad.graded_edges(-mid, -a, lambda y: step(-y))
        right = quad.graded_edges(mid, b, step)
        pieces.append(np.concatenate([-left[::-1], right[1:]]))
    return quad.panel_rule(np.unique(np.concatenate(pieces)), 20)


def moment(f, n, cfg=None, side=None):
    """``int x^n f(x) dx`` (``side`` = "plus"/"minus" restricts to one half-line)."""
    if n < 0:
        raise InvalidParameterError("moment order must be non-negative")
    cfg = cfg or quad.DEFAULT_CONFIG
    lo, hi = f.bounds
    if side == "plus":
        lo = max(lo, 0.0)
    elif side == "minus":
        hi = min(hi, 0.0)
    elif side is not None:
        raise InvalidParameterError(f"unknown side {side!r}")
    if not lo < hi:
        return 0j

    def integrand(x):
        return x ** n * f.evaluator(x)

    if f.is_compact:
        x, w = compact_rule(f, lo, hi, refine=1 if cfg.rel_tol >= 1e-12 else 2)
        return complex(np.sum(w * integrand(x)))
    if f.class_tag == "Z":
        edges = np.arange(lo, hi + f.scale, f.scale)
        edges = np.clip(edges, lo, hi)
        val, _ = quad.integrate(integrand, lo, hi, cfg, breakpoints=list(edges) + [0.0])
        return complex(val)
    a = -math.inf if side != "plus" else 0.0
    b = math.inf if side != "minus" else 0.0
    if a < 0 < b:
        v1, _ = quad.integrate(integrand, a, 0.0, cfg)
        v2, _ = quad.integrate(integrand, 0.0, b, cfg)
        return complex(v1 + v2)
    val, _ = quad.integrate(integrand, a, b, cfg)
    return complex(val)


def l2_norm_squared(f, cfg=None):
    cfg = cfg or quad.DEFAULT_CONFIG
    lo, hi = f.bounds

    def integrand(x):
        return np.abs(f.evaluator(x)) ** 2

    if f.is_compact:
        n_pan = max(8, int(math.ceil((hi - lo) / f.scale)))
        val, _ = quad.integrate(integrand, lo, hi, cfg, breakpoints=np.linspace(lo, hi, n_pan + 1).tolist())
        return float(val.real)
    val, _ = quad.integrate(integrand, lo, hi, cfg,
                            breakpoints=np.arange(lo, hi, max(f.scale, (hi - lo) / 400)).tolist())
    return float(val.real)


# ---------------------------------------------------------------------------
# specification records


def from_spec(record):
    """Build a TestFunction from a specification record (see the CLI docs)."""
    if not isinstance(record, dict) or "kind" not in record:
        raise InvalidParameterError(f"test-function record needs a 'kind': {record!r}")
    kind = record["kind"]
    if kind == "bump":
        return make_bump(record["lo"], record["hi"], record.get("amplitude", 1.0))
    if kind == "gauss_hermite":
        return make_gauss_hermite(record.get("sigma", 1.0), record.get("k", 0))
    if kind == "fourier_of_bump":
        return make_fourier_of(make_bump(record["lo"], record["hi"], record.get("amplitude", 1.0)))
    if kind == "fourier_of":
        return make_fourier_of(from_spec(record["child"]))
    if kind == "sum":
        children = record.get("children") or []
        if len(children) < 2:
            raise InvalidParameterError("sum needs at least two children")
        out = from_spec(children[0])
        for c in children[1:]:
            out = add(out, from_spec(c))
        return out
    if kind == "scale":
        factor = record["factor"]
        if isinstance(factor, (list, tuple)):
            factor = complex(factor[0], factor[1])
        return scale(from_spec(record["child"]), factor)
    if kind == "reflect":
        return reflect(from_spec(record["child"]))
    if kind == "conjugate":
        return conjugate(from_spec(record["child"]))
    if kind == "dilate":
        pre = record.get("prefactor", 1.0)
        if isinstance(pre, (list, tuple)):
            pre = complex(pre[0], pre[1])
        return dilate(from_spec(record["child"]), record["factor"], pre)
    if kind == "poly_gauss":
        coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                  for c in record["coeffs"]]
        sigma = float(record.get("sigma", 1.0))
        if not sigma > 0:
            raise InvalidParameterError("sigma must be positive")
        return _poly_gauss(coeffs, sigma, f"poly_gauss({len(coeffs) - 1},{sigma:g})",
                           {"kind": "poly_gauss", "coeffs": coeffs, "sigma": sigma})
    raise InvalidParameterError(f"unknown test-function kind {kind!r}")
