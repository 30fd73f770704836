"""Numerical integration backbone.

* :func:`integrate` -- globally adaptive Gauss-Kronrod (7/15) on finite or
  infinite intervals, with an optional tanh-sinh path for integrable
  endpoint singularities and period-aware initial subdivision.
* :func:`contour_integral` -- ``(1/2 pi i)`` times a circle integral by the
  trapezoid rule, with node doubling until self-consistent.
* :func:`uniform_dft` -- sampled version of the unitary Fourier transform
  ``(1/sqrt(2 pi)) int e^{ikx} f(x) dx``.
* :func:`panel_rule` / :func:`graded_edges` -- fixed composite Gauss-Legendre
  rules used by vectorised pairings that share nodes across parameters.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, EvaluationError, InvalidIntervalError, InvalidParameterError

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Kronrod 15-point abscissae (non-negative half) and weights, Gauss 7-point
# weights on the even-indexed Kronrod abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 4000
    scheme_hint: str = "adaptive_default"

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise InvalidParameterError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be >= 1")
        if self.scheme_hint not in ("adaptive_default", "tanh_sinh_endpoint"):
            raise InvalidParameterError(f"unknown scheme_hint {self.scheme_hint!r}")

    def scaled(self, factor):
        return QuadratureConfig(self.abs_tol * factor, self.rel_tol * factor,
                                self.max_subdivisions, self.scheme_hint)


DEFAULT_CONFIG = QuadratureConfig()


def _checked(values, x):
    values = np.asarray(values, dtype=complex)
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = np.asarray(x)[np.nonzero(bad)[0][0]] if np.ndim(x) else x
        raise EvaluationError(f"integrand not finite at x={where!r}", location=where)
    return values


def _map_infinite(f, lo, hi):
    """Return (g, a, b) with int_lo^hi f = int_a^b g over a finite interval."""
    if np.isinf(lo) and np.isinf(hi):
        raise ValueError("doubly infinite interval must be split first")
    if np.isinf(hi):
        def g(t):
            s = 1.0 - t
            return f(lo + t / s) / (s * s)
        return g, 0.0, 1.0
    if np.isinf(lo):
        def g(t):
            s = 1.0 - t
            return f(hi - t / s) / (s * s)
        return g, 0.0, 1.0
    return f, lo, hi


def _gk15(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    x = c + h * _NODES15
    fx = _checked(f(x), x)
    k = h * np.dot(_WK15, fx)
    g = h * np.dot(_WG15, fx)
    return k, abs(k - g)


def _adaptive(f, intervals, cfg):
    heap = []
    total = 0j
    err_total = 0.0
    for a, b in intervals:
        v, e = _gk15(f, a, b)
        total += v
        err_total += e
        heapq.heappush(heap, (-e, a, b, v))
    n_sub = len(intervals)
    while err_total > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_sub >= cfg.max_subdivisions:
            raise AccuracyError(
                f"adaptive quadrature did not converge in {n_sub} subdivisions "
                f"(achieved {err_total:.3g})", value=total, achieved=err_total)
        neg_e, a, b, v = heapq.heappop(heap)
        e = -neg_e
        m = 0.5 * (a + b)
        if not (a < m < b) or e <= 50 * _EPS * abs(v):
            # interval at roundoff level; freeze its contribution
            err_total -= e
            heapq.heappush(heap, (0.0, a, b, v))
            if all(item[0] == 0.0 for item in heap):
                break
            continue
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        total += v1 + v2 - v
        err_total += e1 + e2 - e
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        n_sub += 1
    return total, max(err_total, 0.0)


@lru_cache(maxsize=16)
def _tanh_sinh_level(level):
    """Nodes t = k h for one refinement level (only new odd nodes beyond 0)."""
    h = 2.0 ** (-level)
    tmax = 3.5
    if level == 0:
        t = np.arange(-tmax, tmax + 0.5 * h, h)
    else:
        t = np.arange(-tmax + h, tmax, 2 * h)
    u = 0.5 * math.pi * np.sinh(t)
    w = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    # distance from the nearer endpoint in units of the half-width
    dist = 2.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
    return t, np.sign(u), dist, w, h


def _tanh_sinh(f, a, b, cfg, max_level=12):
    c, hw = 0.5 * (a + b), 0.5 * (b - a)
    prev = None
    acc = 0j
    for level in range(max_level + 1):
        t, sgn, dist, w, h = _tanh_sinh_level(level)
        keep = dist > 0
        x = np.where(sgn < 0, a + hw * dist, b - hw * dist)[keep]
        fx = _checked(f(x), x)
        acc += np.dot(w[keep], fx)
        est = acc * hw * (2.0 ** (-level))
        if prev is not None:
            err = abs(est - prev)
            if err <= max(cfg.abs_tol, cfg.rel_tol * abs(est)):
                return est, err
        prev = est
    raise AccuracyError("tanh-sinh quadrature did not converge", value=prev,
                        achieved=err)


def integrate(f, lo, hi, cfg=None, *, breakpoints=None, period=None):
    """Integrate a vectorised ``f`` over ``[lo, hi]``.

    Either limit may be infinite.  ``breakpoints`` seeds the subdivision;
    ``period`` additionally splits a finite interval at multiples of the
    period (use it for ``e^{ikx}`` kernels).  Returns ``(value, err)``.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not lo < hi:
        raise InvalidIntervalError(f"need lo < hi, got [{lo}, {hi}]")
    if np.isinf(lo) and np.isinf(hi):
        mid = 0.0
        if breakpoints:
            mid = float(sorted(breakpoints)[len(breakpoints) // 2])
        v1, e1 = integrate(f, lo, mid, cfg)
        v2, e2 = integrate(f, mid, hi, cfg)
        return v1 + v2, e1 + e2

    if cfg.scheme_hint == "tanh_sinh_endpoint":
        g, a, b = _map_infinite(f, lo, hi)
        return _tanh_sinh(g, a, b, cfg)

    if np.isinf(lo) or np.isinf(hi):
        g, a, b = _map_infinite(f, lo, hi)
        edges = [a, b]
    else:
        g = f
        pts = {lo, hi}
        if breakpoints:
            pts.update(p for p in breakpoints if lo < p < hi)
        if period is not None:
            if period <= 0:
                raise InvalidParameterError("period must be positive")
            n = int(math.ceil((hi - lo) / period))
            pts.update(np.linspace(lo, hi, max(n, 1) + 1).tolist())
        edges = sorted(pts)
    intervals = list(zip(edges[:-1], edges[1:]))
    return _adaptive(g, intervals, cfg)


# ---------------------------------------------------------------------------
# fixed composite rules


@lru_cache(maxsize=8)
def _legendre(order):
    return np.polynomial.legendre.leggauss(order)


def panel_rule(edges, order=20):
    """Composite Gauss-Legendre nodes and weights on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    t, w = _legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t).ravel()
    wx = (half[:, None] * w).ravel()
    return x, wx


def graded_edges(a, b, step):
    """Panel edges from ``a`` to ``b`` with local width ``step(x)``."""
    if not b > a:
        return np.array([a, b]) if b == a else np.empty(0)
    edges = [a]
    x = a
    while x < b:
        h = float(step(x))
        if not h > 0:
            raise InvalidParameterError("panel step must be positive")
        x = min(b, x + h)
        if b - x < 0.25 * h:
            x = b
        edges.append(x)
    return np.asarray(edges)


# ---------------------------------------------------------------------------
# contour integrals


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    node_count: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameterError("contour radius must be positive")
        if self.node_count < 16:
            raise InvalidParameterError("contour needs at least 16 nodes")


def contour_integral(g, c, tol=1e-10, max_nodes=1024):
    """``(1/2 pi i) \\oint g(z) dz`` over the circle ``c`` (counter-clockwise).

    ``g`` must accept an array of complex points.  The node count doubles
    from ``c.node_count`` until successive estimates differ by less than
    ``tol * max(1, |I|)``; :class:`AccuracyError` if ``max_nodes`` is hit.
    """
    def sample(theta):
        z = c.center + c.radius * np.exp(1j * theta)
        vals = np.asarray(g(z), dtype=complex)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            where = z[np.nonzero(bad)[0][0]]
            raise EvaluationError(f"contour integrand not finite at z={where!r}", location=where)
        return np.sum(vals * (z - c.center))

    n = c.node_count
    s = sample(2 * math.pi * np.arange(n) / n)
    est = s / n
    while True:
        if 2 * n > max_nodes:
            raise AccuracyError(f"contour integral not converged at {n} nodes",
                                value=est)
        s += sample(2 * math.pi * (np.arange(n) + 0.5) / n)
        n *= 2
        new = s / n
        diff = abs(new - est)
        est = new
        if diff < tol * max(1.0, abs(est)):
            return complex(est)


# ---------------------------------------------------------------------------
# discrete Fourier transform with the unitary continuous normalisation


def dft_frequencies(n, spacing):
    """Conjugate grid (ascending) matching :func:`uniform_dft`."""
    return 2 * math.pi * np.fft.fftshift(np.fft.fftfreq(n, d=spacing))


def uniform_dft(samples, spacing, origin=0.0):
    """Approximate ``(1/sqrt(2 pi)) int e^{ikx} f(x) dx`` from samples
    ``f(origin + j*spacing)``.  Output is on :func:`dft_frequencies` (ascending).
    """
    f = np.asarray(samples, dtype=complex)
    n = f.size
    if n < 2:
        raise InvalidParameterError("uniform_dft needs at least two samples")
    k = dft_frequencies(n, spacing)
    raw = np.fft.fftshift(np.fft.ifft(f)) * n
    return spacing / SQRT_2PI * np.exp(1j * k * origin) * raw


def inverse_uniform_dft(spectrum, spacing, origin=0.0):
    """Exact inverse of :func:`uniform_dft` on the same grids."""
    F = np.asarray(spectrum, dtype=complex)
    n = F.size
    k = dft_frequencies(n, spacing)
    raw = F * np.exp(-1j * k * origin) * SQRT_2PI / spacing
    return np.fft.fft(np.fft.ifftshift(raw)) / n
