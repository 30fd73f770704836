"""Resonance expansions and continuum reconstruction.

Two discrete expansions use the resonant states:

* ``PlusBasis``: ``phi = sum_n f^+_n <f^-_n, phi>``, i.e. the Taylor series
  ``sum phi^(n)(0) x^n / n!``; meaningful pointwise for entire (class Z)
  functions.
* ``MinusBasis``: ``phi = sum_n f^-_n <f^+_n, phi>``, a series of delta
  derivatives weighted by moments; only meaningful weakly, against
  analytic test functions, and never evaluated pointwise here.

The continuum reconstructions integrate the real-energy eigenfunctions
against their (hermitian) coefficients over ``|E| <= E_max``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import eigen, quad
from .dist import Side
from .eigen import ModelParams
from .errors import (AccuracyError, CapabilityError, ClassViolationError, ConfigError,
                     DomainError, InvalidParameterError)
from .testfn import moment

DEFAULT_N = 30


class Basis(str, enum.Enum):
    PLUS = "plus"    # coefficients <f^-_n, phi> on f^+_n = x^n / sqrt(n!)
    MINUS = "minus"  # coefficients <f^+_n, phi> on f^-_n = (-1)^n delta^(n) / sqrt(n!)


@dataclass(frozen=True, eq=False)
class ResonanceExpansion:
    gamma: float
    basis: Basis
    coeffs: np.ndarray
    origin_tag: str = ""

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size < 1:
            raise InvalidParameterError("an expansion needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "basis", Basis(self.basis))
        if not self.gamma > 0:
            raise InvalidParameterError("gamma must be positive")

    @property
    def N(self):
        return self.coeffs.size - 1


def _sqrt_factorials(N):
    return np.sqrt(np.array([math.factorial(n) for n in range(N + 1)], dtype=float))


def taylor_expand(phi, N=DEFAULT_N, p: ModelParams = ModelParams()):
    """Coefficients ``<f^-_n, phi> = phi^(n)(0) / sqrt(n!)`` of a class-Z function."""
    if phi.class_tag != "Z":
        raise ClassViolationError(
            f"{phi.description}: the Taylor-type expansion is only valid on class Z")
    if N > phi.max_order:
        raise CapabilityError(f"{phi.description}: order {N} exceeds jet capability")
    c = phi.taylor0(N) * _sqrt_factorials(N)  # phi^(n)(0)/n! * sqrt(n!)
    return ResonanceExpansion(p.gamma, Basis.PLUS, c, phi.description)


def moment_expand(phi, N=DEFAULT_N, p: ModelParams = ModelParams(), cfg=None):
    """Coefficients ``<f^+_n, phi> = m_n(phi) / sqrt(n!)`` of a class-D function."""
    if phi.class_tag != "D":
        raise ClassViolationError(
            f"{phi.description}: the moment expansion is only valid on class D")
    m = np.array([moment(phi, n, cfg) for n in range(N + 1)])
    return ResonanceExpansion(p.gamma, Basis.MINUS, m / _sqrt_factorials(N), phi.description)


@dataclass(frozen=True)
class ExpansionValue:
    value: complex | np.ndarray
    tail: float | np.ndarray


def _tail_estimate(terms):
    """Geometric extrapolation of ``sum_{n>N} |t_n|`` from the last terms."""
    t = np.abs(terms)
    if t.shape[0] < 4:
        return np.full(t.shape[1:], np.inf)
    last = t[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.stack([t[-1] / t[-3], t[-2] / t[-4]])  # two-step ratios skip parity zeros
    q = np.sqrt(np.max(np.where(np.isfinite(ratios), ratios, 0.0), axis=0))
    tail = np.where(q < 1, np.maximum(last, t[-2]) * q / np.maximum(1 - q, 1e-300), np.inf)
    return np.where((last == 0) & (t[-2] == 0), 0.0, tail)


def eval_plus_expansion(e: ResonanceExpansion, x, with_tail=False):
    """``sum_n c_n x^n / sqrt(n!)`` (vectorised over ``x``)."""
    if e.basis is not Basis.PLUS:
        raise DomainError("the MinusBasis series has no pointwise values; use pair_minus_expansion")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    N = e.N
    terms = np.empty((N + 1,) + xa.shape, dtype=complex)
    pw = np.ones(xa.shape)
    sf = _sqrt_factorials(N)
    for n in range(N + 1):
        terms[n] = e.coeffs[n] * pw / sf[n]
        pw = pw * xa
    value = terms.sum(axis=0)
    scalar = np.ndim(x) == 0
    if scalar:
        value = complex(value[0])
    if not with_tail:
        return value
    tail = _tail_estimate(terms)
    return ExpansionValue(value, float(tail[0]) if scalar else tail)


def pair_minus_expansion(e: ResonanceExpansion, chi):
    """``sum_n c_n <chi, f^-_n> = sum_n c_n chi^(n)(0) / sqrt(n!)``."""
    if e.basis is not Basis.MINUS:
        raise DomainError("pair_minus_expansion needs a MinusBasis expansion")
    N = e.N
    if N > chi.max_order:
        raise CapabilityError(f"{chi.description}: order {N} exceeds jet capability")
    d = chi.taylor0(N) * _sqrt_factorials(N)  # chi^(n)(0) / sqrt(n!)
    return complex(np.sum(e.coeffs * d))


def apply_H(e: ResonanceExpansion, p: ModelParams | None = None):
    """Action of the Hamiltonian on an expansion.

    MinusBasis coefficients pick up ``conj(E_n) = -i gamma (n+1/2)``,
    PlusBasis coefficients ``E_n = +i gamma (n+1/2)``.
    """
    g = e.gamma if p is None else p.gamma
    n = np.arange(e.N + 1)
    En = 1j * g * (n + 0.5)
    factor = np.conj(En) if e.basis is Basis.MINUS else En
    return ResonanceExpansion(g, e.basis, e.coeffs * factor, f"H[{e.origin_tag}]")


# ---------------------------------------------------------------------------
# continuum reconstruction


@dataclass(frozen=True)
class ReconstructionConfig:
    E_max: float = 120.0
    E_nodes: int = 2400
    x_samples: tuple = (0.5, 0.8, 1.2, 1.3, 1.5)
    tail_tol: float | None = None

    def __post_init__(self):
        if not self.E_max > 0:
            raise ConfigError("E_max must be positive")
        if int(self.E_nodes) != self.E_nodes or self.E_nodes < 16:
            raise ConfigError("E_nodes must be an integer >= 16")
        xs = tuple(float(x) for x in np.atleast_1d(self.x_samples))
        if not xs:
            raise ConfigError("x_samples must not be empty")
        if any(x == 0.0 for x in xs):
            raise DomainError("reconstruction samples must avoid x = 0")
        object.__setattr__(self, "x_samples", xs)
        if self.tail_tol is not None and not self.tail_tol > 0:
            raise ConfigError("tail_tol must be positive")


@dataclass(frozen=True)
class ReconstructionResult:
    x: np.ndarray
    values: np.ndarray
    target: np.ndarray
    tail: np.ndarray
    E_max: float
    family: str

    @property
    def abs_err(self):
        return np.abs(self.values - self.target)


def _energy_rule(rc):
    """GL nodes on ``[-E_max, E_max]`` with breakpoints at ``+-0.75 E_max``;
    returns nodes, weights and the mask of the inner window."""
    E = rc.E_max
    order = 20
    panels = max(3, int(math.ceil(rc.E_nodes / order)))
    inner = max(1, int(round(panels * 0.75)))
    outer = max(1, int(math.ceil((panels - inner) / 2)))
    edges = np.concatenate([
        np.linspace(-E, -0.75 * E, outer + 1)[:-1],
        np.linspace(-0.75 * E, 0.75 * E, inner + 1)[:-1],
        np.linspace(0.75 * E, E, outer + 1),
    ])
    x, w = quad.panel_rule(edges, order)
    return x, w, np.abs(x) < 0.75 * E


def _finish(phi, rc, values, partial, family):
    x = np.asarray(rc.x_samples)
    target = np.asarray(phi(x), dtype=complex)
    tail = np.abs(values - partial)
    if rc.tail_tol is not None and np.max(tail) > rc.tail_tol:
        raise AccuracyError(
            f"continuum truncation tail {np.max(tail):.3g} exceeds {rc.tail_tol:g} at E_max={rc.E_max:g}",
            value=values, achieved=float(np.max(tail)))
    return ReconstructionResult(x, values, target, tail, rc.E_max, family)


def reconstruct_continuum(phi, rc: ReconstructionConfig = ReconstructionConfig(),
                          p: ModelParams = ModelParams(), cfg=None):
    """``sum_+- int dE psi^E_+-(x) <psi^E_+-|phi>`` truncated to ``|E| <= E_max``.

    With ``x = +-e^u`` the kernel ``psi^E(x)`` is ``e^{-u/2} e^{-iEu/gamma}``
    up to normalisation, so the energy integral is a Fourier inversion in
    ``u``; it is done with Gauss-Legendre panels that resolve the
    oscillation of both factors.
    """
    En, w, inner = _energy_rule(rc)
    x = np.asarray(rc.x_samples)
    values = np.zeros(x.size, dtype=complex)
    partial = np.zeros(x.size, dtype=complex)
    norm = 1.0 / math.sqrt(2 * math.pi * p.gamma)
    for side in (Side.PLUS, Side.MINUS):
        sel = (x > 0) if side is Side.PLUS else (x < 0)
        if not np.any(sel):
            continue
        coef = eigen.pair_psi_hermitian(phi, En, side, p, cfg)
        u = np.log(np.abs(x[sel]))
        kern = norm * np.exp(np.outer(u, -(1j * En / p.gamma + 0.5)))
        values[sel] = kern @ (w * coef)
        partial[sel] = kern[:, inner] @ (w[inner] * coef[inner])
    return _finish(phi, rc, values, partial, "psi")


def reconstruct_continuum_fourier(phi, rc: ReconstructionConfig = ReconstructionConfig(),
                                  p: ModelParams = ModelParams(), cfg=None):
    """``sum_+- int dE F[psi^{-E}_+-](x) <F[psi^{-E}_+-]|phi>`` truncated to ``|E| <= E_max``."""
    En, w, inner = _energy_rule(rc)
    x = np.asarray(rc.x_samples)
    values = np.zeros(x.size, dtype=complex)
    partial = np.zeros(x.size, dtype=complex)
    for side in (Side.PLUS, Side.MINUS):
        coef = eigen.pair_F_psi_hermitian(phi, En, side, p, cfg)
        for i, xi in enumerate(x):
            kern = eigen.F_psi_pointwise(xi, En, side, p)
            values[i] += np.sum(w * kern * coef)
            partial[i] += np.sum(w[inner] * kern[inner] * coef[inner])
    return _finish(phi, rc, values, partial, "fourier_psi")


__all__ = [
    "Basis", "ResonanceExpansion", "ExpansionValue", "ReconstructionConfig",
    "ReconstructionResult", "taylor_expand", "moment_expand", "eval_plus_expansion",
    "pair_minus_expansion", "apply_H", "reconstruct_continuum",
    "reconstruct_continuum_fourier",
]
