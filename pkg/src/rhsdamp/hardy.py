"""Numerical Hardy-class diagnostics for functions sampled on the real E axis.

Write ``f(E) = (2 pi)^{-1/2} int a(tau) e^{i E tau} d tau``.  A function in
the Hardy class of the upper half-plane has ``a`` supported on ``tau >= 0``;
then ``f(E + i s) = (2 pi)^{-1/2} int a(tau) e^{-s tau} e^{i E tau} d tau``
decays as ``s`` grows.  The diagnostic estimates ``a`` by a DFT of the
samples and reports

* the fraction of ``int |a|^2`` on the half-line belonging to the requested
  half-plane, and
* slopes of ``log ||f(. +- i s)||_2`` for ``s`` in ``[0.1, 1]``, computed by
  Plancherel from ``|a(tau)|^2 e^{-+2 s tau}``.

It is deliberately three-way: finite grids cannot certify an asymptotic
property, so disagreement between the indicators gives ``Inconclusive``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import eigen, quad
from .errors import InvalidParameterError

MASS_THRESHOLD = 0.99
RAY_WINDOW = (0.1, 1.0)
EDGE_MASS_LIMIT = 1e-2  # amplified band-edge mass tolerated by a ray fit
RESOLUTION_LIMIT = 5e-2  # unamplified mass outside the fit band; above it the grid is too coarse
MIN_SAMPLES = 256
FIT_FRACTION = 0.25


class Classification(str, enum.Enum):
    UPPER_LIKELY = "UpperLikely"
    LOWER_LIKELY = "LowerLikely"
    NEITHER = "Neither"
    INCONCLUSIVE = "Inconclusive"


class HalfPlane(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class Family(str, enum.Enum):
    PSI = "psi"
    FPSI = "fpsi"


@dataclass(frozen=True)
class HardyReport:
    classification: Classification
    decay_fit_upper: float
    decay_fit_lower: float
    halfline_mass_ratio: float
    grid_meta: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "classification": self.classification.value,
            "decay_fit_upper": self.decay_fit_upper,
            "decay_fit_lower": self.decay_fit_lower,
            "halfline_mass_ratio": self.halfline_mass_ratio,
            "grid_meta": dict(self.grid_meta),
        }


def energy_grid(E_max, n):
    """Uniform grid of ``n`` points on ``[-E_max, E_max)`` and its spacing."""
    h = 2.0 * E_max / n
    return -E_max + h * np.arange(n), h


def sample_energy_pairing(phi, family, branch, E_grid, p=eigen.ModelParams(), cfg=None):
    """Hermitian pairings ``<psi^E|phi>`` or ``<F[psi^{-E}]|phi>`` on a real grid."""
    E = np.asarray(E_grid, dtype=float)
    if Family(family) is Family.PSI:
        return np.asarray(eigen.pair_psi_hermitian(phi, E, branch, p, cfg))
    return np.asarray(eigen.pair_F_psi_hermitian(phi, E, branch, p, cfg))


def _conjugate_spectrum(samples, spacing):
    """``tau`` grid (ascending) and ``a(tau)`` from uniform samples."""
    n = samples.size
    # quad.uniform_dft uses e^{+ik x}; a(tau) needs e^{-i tau E}, i.e. k = -tau
    k = quad.dft_frequencies(n, spacing)
    A = quad.uniform_dft(samples, spacing, 0.0)
    return -k[::-1], A[::-1]


def _taper(n, spacing):
    """Smooth window vanishing to all orders at the ends of the sample window.

    A hard cut-off leaks into the conjugate variable like ``1/tau``, which
    the ray multipliers would amplify exponentially; this window's transform
    decays faster than any power, at the cost of smoothing ``a`` over a
    width of a few ``1/window``.
    """
    u = (np.arange(n) - n / 2) / (n / 2)
    out = np.zeros(n)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class _Indicators:
    upper_mass: float
    slope_up: float
    slope_lo: float
    edge_up: float   # amplified edge mass seen by the upper ray
    edge_lo: float
    shell: float     # fraction of int |a|^2 outside the fit band


def _indicators(samples, spacing):
    tau, a = _conjugate_spectrum(samples * _taper(samples.size, spacing), spacing)
    w = np.abs(a) ** 2
    total = np.sum(w)
    if total == 0.0:
        return None
    upper_mass = float(np.sum(w[tau > 0]) + 0.5 * np.sum(w[tau == 0])) / total
    # Ray fits use |tau| <= band/4.  The multipliers e^{-+2 s tau} amplify
    # anything far out on one side (roundoff, or content wrapped around by
    # aliasing), so the fit band stays well inside the resolved band and the
    # shell band/4 < |tau| <= band/2 serves as the contamination probe.
    band = np.max(np.abs(tau))
    fit = FIT_FRACTION * band
    inner = np.abs(tau) <= fit
    s = np.linspace(*RAY_WINDOW, 10)
    wi, ti = w[inner], tau[inner]
    with np.errstate(divide="ignore"):
        log_up = 0.5 * np.log([np.sum(wi * np.exp(-2 * si * ti)) for si in s])
        log_lo = 0.5 * np.log([np.sum(wi * np.exp(2 * si * ti)) for si in s])
    slope_up = float(np.polyfit(s, log_up, 1)[0])
    slope_lo = float(np.polyfit(s, log_lo, 1)[0])
    smax = RAY_WINDOW[1]
    shell = (np.abs(tau) > fit) & (np.abs(tau) <= 2 * fit)
    neg, pos = shell & (tau < 0), shell & (tau > 0)
    edge_up = float(np.sum(w[neg] * np.exp(-2 * smax * tau[neg]))
                    / np.sum(wi * np.exp(-2 * smax * ti)))
    edge_lo = float(np.sum(w[pos] * np.exp(2 * smax * tau[pos]))
                    / np.sum(wi * np.exp(2 * smax * ti)))
    outside = float(np.sum(w[~inner]) / total)
    return _Indicators(upper_mass, slope_up, slope_lo, edge_up, edge_lo, outside)


def _verdict(ind):
    if ind.shell > RESOLUTION_LIMIT:
        # aliased content lands on both sides and would mimic Neither
        return Classification.INCONCLUSIVE
    up_ok = ind.edge_up <= EDGE_MASS_LIMIT
    lo_ok = ind.edge_lo <= EDGE_MASS_LIMIT
    if ind.upper_mass >= MASS_THRESHOLD and ind.slope_up <= 0:
        return Classification.UPPER_LIKELY if up_ok else Classification.INCONCLUSIVE
    if 1 - ind.upper_mass >= MASS_THRESHOLD and ind.slope_lo <= 0:
        return Classification.LOWER_LIKELY if lo_ok else Classification.INCONCLUSIVE
    if (ind.slope_up > 0 and ind.slope_lo > 0
            and max(ind.upper_mass, 1 - ind.upper_mass) < MASS_THRESHOLD):
        return Classification.NEITHER
    return Classification.INCONCLUSIVE


def hardy_diagnostic(samples, spacing, halfplane=HalfPlane.UPPER):
    """Classify uniformly sampled values of ``f`` on the real axis.

    ``halfline_mass_ratio`` refers to ``halfplane``: the ``tau > 0`` mass for
    ``Upper`` and the ``tau < 0`` mass for ``Lower``.  The verdict itself does
    not depend on ``halfplane``.  A ray whose fit is contaminated by content
    near the band edge (aliasing: the grid is too coarse for the
    exponential multiplier) cannot support a verdict, and neither can samples
    whose conjugate function has substantial mass outside the fit band.
    """
    f = np.asarray(samples, dtype=complex)
    if f.ndim != 1 or f.size < MIN_SAMPLES:
        raise InvalidParameterError(f"hardy_diagnostic needs at least {MIN_SAMPLES} samples")
    if not spacing > 0:
        raise InvalidParameterError("spacing must be positive")
    hp = HalfPlane(halfplane)
    meta = {"samples": int(f.size), "spacing": float(spacing),
            "window": [float(-spacing * f.size / 2), float(spacing * f.size / 2)]}
    ind = _indicators(f, spacing)
    if ind is None:
        meta["reason"] = "zero samples"
        return HardyReport(Classification.INCONCLUSIVE, 0.0, 0.0, 0.5, meta)
    meta["edge_mass_upper_ray"] = ind.edge_up
    meta["edge_mass_lower_ray"] = ind.edge_lo
    meta["outside_fit_band"] = ind.shell
    verdict = _verdict(ind)
    ratio = ind.upper_mass if hp is HalfPlane.UPPER else 1.0 - ind.upper_mass
    ratio = float(min(1.0, max(0.0, ratio)))
    return HardyReport(verdict, ind.slope_up, ind.slope_lo, ratio, meta)


__all__ = [
    "Classification", "HalfPlane", "Family", "HardyReport", "energy_grid",
    "sample_energy_pairing", "hardy_diagnostic",
]
