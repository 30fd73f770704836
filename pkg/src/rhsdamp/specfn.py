"""Complex Gamma function (Lanczos g=7, n=9 with reflection)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleError

_G = 7.0
_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_POLE_TOL = 1e-12
_OVERFLOW_LOG = 700.0


@dataclass(frozen=True)
class GammaValue:
    """``value`` is Gamma(z) itself, or log Gamma(z) when ``log_scale_flag``."""

    value: complex | np.ndarray
    log_scale_flag: bool = False

    def as_complex(self):
        if self.log_scale_flag:
            return np.exp(self.value)
        return self.value


def _lanczos_log(z):
    # valid for Re z >= 1/2
    zm = z - 1.0
    x = np.full(zm.shape, _P[0], dtype=complex)
    for i in range(1, _P.size):
        x = x + _P[i] / (zm + i)
    t = zm + _G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(x)


def _log_sin_pi(z):
    """log sin(pi z) without overflow for large |Im z| (branch irrelevant)."""
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z.imag) <= 1.0
    out[small] = np.log(np.sin(np.pi * z[small]))
    up = (~small) & (z.imag > 0)
    zu = z[up]
    out[up] = 1j * np.pi - 1j * np.pi * zu - np.log(2j) + np.log(1.0 - np.exp(2j * np.pi * zu))
    lo = (~small) & (z.imag < 0)
    zl = z[lo]
    out[lo] = 1j * np.pi * zl - np.log(2j) + np.log(1.0 - np.exp(-2j * np.pi * zl))
    return out


def log_gamma(z):
    """A logarithm of Gamma(z) (not necessarily the principal branch)."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    nearest = np.round(z.real)
    at_pole = (nearest <= 0) & (np.abs(z - nearest) < _POLE_TOL)
    if np.any(at_pole):
        k = int(-nearest[np.nonzero(at_pole)[0][0]])
        # residue of Gamma at -k is (-1)^k / k!
        raise PoleError(f"Gamma has a pole at z={-k}", index=k,
                        residue=(-1) ** k / math.factorial(k))
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _lanczos_log(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = _LOG_PI - _log_sin_pi(zl) - _lanczos_log(1.0 - zl)
    return out[0] if scalar else out


def gamma(z) -> GammaValue:
    """Gamma(z) for complex ``z`` (scalar or array).

    Falls back to returning log Gamma with ``log_scale_flag=True`` when any
    requested value would overflow a double.
    """
    lg = log_gamma(z)
    if np.any(np.real(lg) > _OVERFLOW_LOG):
        return GammaValue(lg, True)
    val = np.exp(lg)
    # exact values on the positive real axis keep integer factorials clean
    zr = np.asarray(z)
    if np.ndim(zr) == 0 and np.isreal(zr):
        val = complex(val.real, 0.0)
    elif np.ndim(zr):
        val = np.where(np.isreal(zr), val.real + 0j, val)
    return GammaValue(val, False)


def cgamma(z):
    """Gamma(z) as complex numbers; raises OverflowError instead of log scaling."""
    g = gamma(z)
    if g.log_scale_flag:
        raise OverflowError("Gamma(z) overflows double precision")
    return g.value
