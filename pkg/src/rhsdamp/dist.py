"""Regularised one-sided powers ``x^lambda_+-`` and related distributions.

The pairing ``<x^lambda_+, phi> = int_0^inf x^lambda phi(x) dx`` is continued
to ``Re lambda > -n-1`` by subtracting the degree ``n-1`` Taylor polynomial
of ``phi`` on ``[0, 1]``::

    int_0^1 x^lam [phi - sum_{k<n} c_k x^k] dx + int_1^inf x^lam phi dx
        + sum_{k=1..n} c_{k-1} / (lam + k),          c_k = phi^(k)(0) / k!

For ``x^lambda_-`` the same formula is applied to ``phi(-x)``.  Numerically
the subtracted remainder on a small interval ``[0, r]`` is integrated term
by term from the exact jet (no cancellation), the rest with composite
Gauss-Legendre panels shared by every ``lambda`` of a vectorised call.

All pairings are bilinear: no complex conjugation is applied.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import quad
from .errors import CapabilityError, PoleError
from .specfn import cgamma, log_gamma
from .testfn import TestFunction, derivative_at

SQRT_2PI = math.sqrt(2.0 * math.pi)
POLE_TOL = 1e-10
LIMIT_SWITCH = 0.05
_SERIES_TAIL = 1e-17


class Side(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self):
        return 1 if self is Side.PLUS else -1


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


class BoundarySign(enum.IntEnum):
    PLUS_I0 = 1
    MINUS_I0 = -1


@dataclass(frozen=True)
class PowerDistribution:
    lam: complex | np.ndarray
    side: Side


@dataclass(frozen=True)
class BoundaryPower:
    alpha: complex | np.ndarray
    sign: BoundarySign


# ---------------------------------------------------------------------------
# core: split pairing into a smooth part and explicit poles


@dataclass
class _Parts:
    smooth: np.ndarray  # analytic part, shape of lam
    coeffs: np.ndarray  # c_0..c_{n-1} (side-adjusted Taylor coefficients at 0)
    n: int

    def pole_sum(self, lam, skip=None):
        out = np.zeros(lam.shape, dtype=complex)
        for k in range(1, self.n + 1):
            den = lam + k
            if skip is not None:
                den = np.where(skip == k, np.inf, den)
            out = out + self.coeffs[k - 1] / den
        return out


def _side_coeffs(phi, side, order):
    c = phi.taylor0(order)
    if Side(side) is Side.MINUS:
        c = c * (-1.0) ** np.arange(order + 1)
    return c


def _series_radius(c, radius0):
    K = c.size - 1
    r = 1.0 if not math.isfinite(radius0) else min(1.0, radius0 / 4.0)
    if r == 0.0:
        return 0.0
    k = np.arange(K + 1)
    mags = np.abs(c)
    for _ in range(200):
        terms = mags * r ** k
        top = np.max(terms)
        if top == 0.0 or terms[-1] <= _SERIES_TAIL * top:
            return r
        r *= 0.8
    return r


def _half_line(phi, side):
    """Evaluator of x -> phi(+-x) on x >= 0 and the window where it lives."""
    lo, hi = phi.bounds
    if Side(side) is Side.PLUS:
        return (lambda x: phi.evaluator(x)), max(lo, 0.0), max(hi, 0.0)
    return (lambda x: phi.evaluator(-x)), max(-hi, 0.0), max(-lo, 0.0)


def _panel_nodes(a, b, beta, scale, refine, edge=None):
    if not b > a:
        return np.empty(0), np.empty(0)

    def step(x):
        s = min(scale, 0.5 * x, math.pi * x / max(beta, 1.0))
        if edge is not None:
            # compact support ends flat but not analytically: grade towards it
            s = min(s, max(0.5 * abs(edge - x), 0.25 * scale))
        return s / refine

    return quad.panel_rule(quad.graded_edges(a, b, step), 20)


def _flat_start(psi, lo, b, re_min):
    """For functions flat at 0: first x below which x^re_min |psi| is negligible."""
    x = max(lo, 1e-300)
    if x > 0 and lo > 0:
        return lo
    x = min(b, 1.0) / 2.0
    while x > 1e-12:
        v = abs(complex(psi(np.array([x]))[0])) * x ** re_min
        if v < 1e-30:
            return x
        x /= 2.0
    return x


def _parts(phi: TestFunction, lam, side, cfg=None, n=None):
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    refine = 1 if (cfg is None or cfg.rel_tol >= 1e-12) else 2
    re_min = float(np.min(lam.real))
    if n is None:
        n = max(0, math.floor(-re_min)) + 1
    K = min(phi.max_order, 32)
    if n > K:
        raise CapabilityError(f"subtraction order {n} exceeds jet capability {K}")
    c = _side_coeffs(phi, side, K)
    r = _series_radius(c, phi.radius0)
    psi, lo, hi = _half_line(phi, side)
    beta = float(np.max(np.abs(lam.imag)))
    scale = phi.scale

    smooth = np.zeros(lam.shape, dtype=complex)
    # series part on [0, r]
    if r > 0:
        logr = math.log(r)
        for k in range(n, K + 1):
            if c[k] != 0:
                p = lam + k + 1
                smooth += c[k] * np.exp(p * logr) / p
    # subtracted part on [r, 1]
    poly = c[:n]
    has_poly = np.any(poly != 0)
    a = r
    if r == 0.0:
        a = _flat_start(psi, lo, 1.0, re_min)
    if not has_poly:
        a, b = max(a, lo), min(1.0, hi)
    else:
        b = 1.0
    edge = hi if phi.is_compact else None
    x, w = _panel_nodes(a, b, beta, scale, refine, edge)
    if x.size:
        vals = psi(x)
        if has_poly:
            vals = vals - np.polynomial.polynomial.polyval(x, poly)
        smooth += np.exp(np.outer(lam, np.log(x))) @ (w * vals)
    # tail on [1, hi]
    x, w = _panel_nodes(max(1.0, lo), hi, beta, scale, refine, edge)
    if x.size:
        wv = w * psi(x)
        logx = np.log(x)
        for s in range(0, x.size, 4096):
            smooth += np.exp(np.outer(lam, logx[s:s + 4096])) @ wv[s:s + 4096]
    return _Parts(smooth, c[:n].copy(), n)


def _reshape(out, like):
    return complex(out[0]) if np.ndim(like) == 0 else out.reshape(np.shape(like))


def _check_poles(lam, n, coeffs, side):
    for k in range(1, n + 1):
        near = np.abs(lam + k) < POLE_TOL
        if np.any(near):
            raise PoleError(f"x^lambda_{Side(side).value} has a pole at lambda=-{k}",
                            index=k, residue=complex(coeffs[k - 1]))


# ---------------------------------------------------------------------------
# public operations


def pair_power(phi, d: PowerDistribution, cfg=None):
    """Regularised ``<x^lambda_side, phi>`` (vectorised over ``d.lam``)."""
    lam = np.atleast_1d(np.asarray(d.lam, dtype=complex)).ravel()
    p = _parts(phi, lam, d.side, cfg)
    _check_poles(lam, p.n, p.coeffs, d.side)
    return _reshape(p.smooth + p.pole_sum(lam), d.lam)


def pair_power_values(phi, lam, side, cfg=None):
    return pair_power(phi, PowerDistribution(lam, Side(side)), cfg)


def residue_power(phi, k, side):
    """Residue of ``lambda -> <x^lambda_side, phi>`` at ``lambda = -k``."""
    if k < 1:
        raise ValueError("pole index k must be >= 1")
    ck = phi.taylor0(k - 1)[k - 1]
    if Side(side) is Side.MINUS:
        ck *= (-1) ** (k - 1)
    return complex(ck)


def pair_abs_power(phi, lam, parity, cfg=None):
    """``<|x|^lambda, phi>`` (even) or ``<sign(x)|x|^lambda, phi>`` (odd)."""
    plus = pair_power_values(phi, lam, Side.PLUS, cfg)
    minus = pair_power_values(phi, lam, Side.MINUS, cfg)
    if Parity(parity) is Parity.EVEN:
        return plus + minus
    return plus - minus


def _phase_minus_one_over_eps(eps, s):
    """``(1 - e^{i pi s eps}) / eps`` for small ``eps`` without cancellation."""
    w = 1j * math.pi * s * eps
    # (e^w - 1) / w = sum_j w^j / (j+1)!
    term = np.ones(eps.shape, dtype=complex)
    acc = term.copy()
    for j in range(1, 24):
        term = term * w / (j + 1)
        acc = acc + term
    return -1j * math.pi * s * acc


def pair_boundary_power(phi, b: BoundaryPower, cfg=None):
    """``<(k +- i0)^alpha, phi>`` with ``(k+-i0)^a = k^a_+ + e^{+-i a pi} k^a_-``.

    Entire in ``alpha``: near negative integers the two one-sided poles are
    combined analytically.
    """
    alpha = np.atleast_1d(np.asarray(b.alpha, dtype=complex)).ravel()
    s = int(b.sign)
    n = max(0, math.floor(-float(np.min(alpha.real)))) + 1
    pp = _parts(phi, alpha, Side.PLUS, cfg, n=n)
    pm = _parts(phi, alpha, Side.MINUS, cfg, n=n)
    nearest = np.round(alpha.real)
    near = (nearest <= -1) & (np.abs(alpha - nearest) < LIMIT_SWITCH)
    m = np.where(near, -nearest, 0).astype(int)
    phase = np.exp(1j * math.pi * s * alpha)
    out = (pp.smooth + pp.pole_sum(alpha, skip=m)
           + phase * (pm.smooth + pm.pole_sum(alpha, skip=m)))
    if np.any(near):
        idx = np.nonzero(near)[0]
        eps = alpha[idx] + m[idx]
        cm = pp.coeffs[m[idx] - 1]
        out[idx] += cm * _phase_minus_one_over_eps(eps, s)
    return _reshape(out, b.alpha)


def finite_part_inverse_power(phi, m, cfg=None):
    """Finite part ``<k^{-m}, phi>``: the ``alpha -> -m`` limit of ``(k+-i0)^alpha``
    with the delta contribution removed (independent of the sign choice)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lam = np.array([-float(m)], dtype=complex)
    n = m + 1
    pp = _parts(phi, lam, Side.PLUS, cfg, n=n)
    pm = _parts(phi, lam, Side.MINUS, cfg, n=n)
    skip = np.array([m])
    plus = pp.smooth + pp.pole_sum(lam, skip=skip)
    minus = pm.smooth + pm.pole_sum(lam, skip=skip)
    return complex((plus + (-1) ** m * minus)[0])


def pair_delta_derivative(phi, n):
    """``<delta^(n), phi> = (-1)^n phi^(n)(0)``."""
    return (-1) ** n * derivative_at(phi, 0.0, n)


def fourier_power_pairing(phi, lam, side, cfg=None, boundary=None):
    """``<F[x^lambda_side], phi>`` from the closed form
    ``+-(i/sqrt(2pi)) e^{+-i lambda pi/2} Gamma(lambda+1) (k +- i0)^{-lambda-1}``.

    ``boundary`` overrides the boundary-value sign; by default the sign
    follows ``side`` (the choice for which duality with ``F[phi]`` holds).
    """
    side = Side(side)
    sgn = side.sign
    bsign = BoundarySign(sgn) if boundary is None else BoundarySign(boundary)
    lam_a = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    nearest = np.round(lam_a.real)
    bad = (nearest <= -1) & (np.abs(lam_a - nearest) < 1e-12)
    if np.any(bad):
        k = int(-nearest[np.nonzero(bad)[0][0]])
        raise PoleError(f"F[x^lambda] has a pole at lambda=-{k}", index=k)
    pref = sgn * 1j / SQRT_2PI * np.exp(sgn * 0.5j * math.pi * lam_a + log_gamma(lam_a + 1.0))
    bp = pair_boundary_power(phi, BoundaryPower(-lam_a - 1.0, bsign), cfg)
    return _reshape(pref * np.atleast_1d(bp), lam)


def fourier_power_integer_pairing(phi, n, side, cfg=None):
    """``<F[x^n_side], phi>`` from
    ``(1/sqrt(2pi)) [(+-i)^{n+1} n! k^{-n-1} + (-+i)^n pi delta^(n)(k)]``."""
    side = Side(side)
    sgn = side.sign
    fp = finite_part_inverse_power(phi, n + 1, cfg)
    delta = pair_delta_derivative(phi, n)
    val = ((sgn * 1j) ** (n + 1) * math.factorial(n) * fp
           + (-sgn * 1j) ** n * math.pi * delta)
    return complex(val / SQRT_2PI)


__all__ = [
    "Side", "Parity", "BoundarySign", "PowerDistribution", "BoundaryPower",
    "pair_power", "pair_power_values", "residue_power", "pair_abs_power",
    "pair_boundary_power", "finite_part_inverse_power", "pair_delta_derivative",
    "fourier_power_pairing", "fourier_power_integer_pairing", "cgamma",
]
