"""Energy eigenfunctionals, resonant states and residues of the damped oscillator.

The Hamiltonian is ``H = i gamma (x d/dx + 1/2)``.  Its generalised energy
eigenfunctions are

    psi^E_+-(x) = (2 pi gamma)^{-1/2} x_+-^{-(iE/gamma + 1/2)}

and its resonant (Gamow) states are ``f^+_n = x^n / sqrt(n!)`` and
``f^-_n = (-1)^n delta^(n) / sqrt(n!)`` with complex eigenvalues
``+-E_n``, ``E_n = i gamma (n + 1/2)``.

Pairings named ``*_bilinear`` (and the default ``pair_*`` functions) apply
no complex conjugation; they are analytic in ``E`` and carry the poles and
residues.  ``*_hermitian`` variants conjugate the distribution and are
meant for real ``E`` only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import dist, quad
from .dist import Side
from .errors import CapabilityError, ConfigError, DomainError, InvalidParameterError, PoleError
from .jet import Jet
from .specfn import log_gamma
from .testfn import TestFunction, conjugate, derivative_at, moment

POLE_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    gamma: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.gamma, (int, float)) and self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidParameterError(f"gamma must be a positive real, got {self.gamma!r}")

    def E(self, n):
        """Resonance energy ``E_n = i gamma (n + 1/2)``."""
        return 1j * self.gamma * (n + 0.5)


class Kind(str, enum.Enum):
    PSI = "psi"
    FPSI = "fpsi"
    EVEN = "even"
    ODD = "odd"


class Family(str, enum.Enum):
    PLUS = "plus"    # f^+_n = x^n / sqrt(n!)
    MINUS = "minus"  # f^-_n = (-1)^n delta^(n) / sqrt(n!)


@dataclass(frozen=True)
class EnergyPoint:
    E: complex
    branch: Side = Side.PLUS
    kind: Kind = Kind.PSI


@dataclass(frozen=True)
class ResonantState:
    n: int
    sign: Family

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise InvalidParameterError("resonant state index must be a non-negative integer")

    def eigenvalue(self, p: ModelParams):
        e = p.E(self.n)
        return e if Family(self.sign) is Family.PLUS else -e


def _psi_exponent(E, gamma):
    return -(1j * np.asarray(E, dtype=complex) / gamma + 0.5)


def _check_lattice(E, p, sign, what):
    """Raise when ``E`` is within POLE_TOL of ``sign * E_n`` for some n >= 0."""
    Ea = np.atleast_1d(np.asarray(E, dtype=complex))
    t = (sign * Ea / (1j * p.gamma)) - 0.5  # n for an exact hit
    nearest = np.round(t.real)
    hit = (nearest >= 0) & (np.abs(Ea - sign * 1j * p.gamma * (nearest + 0.5)) < POLE_TOL)
    if np.any(hit):
        n = int(nearest[np.nonzero(hit)[0][0]])
        raise PoleError(f"{what} has a pole at E = {'+' if sign > 0 else '-'}E_{n}", index=n)


def pair_psi_bilinear(phi, E, branch, p: ModelParams, cfg=None):
    """``<psi^E_branch, phi>`` without conjugation (vectorised over ``E``)."""
    _check_lattice(E, p, -1, "psi^E")
    lam = _psi_exponent(E, p.gamma)
    val = dist.pair_power_values(phi, lam, Side(branch), cfg)
    return val / math.sqrt(2 * math.pi * p.gamma)


def pair_psi_hermitian(phi, E, branch, p: ModelParams, cfg=None):
    """``int conj(psi^E_branch(x)) phi(x) dx`` for real ``E``."""
    if np.any(np.imag(E) != 0):
        raise InvalidParameterError("the hermitian pairing is defined for real energies only")
    lam = 1j * np.asarray(E, dtype=float) / p.gamma - 0.5
    val = dist.pair_power_values(phi, lam, Side(branch), cfg)
    return val / math.sqrt(2 * math.pi * p.gamma)


def psi_pointwise(x, E, branch, p: ModelParams):
    """``psi^E_branch(x)`` for ``x != 0``."""
    x = float(x)
    if x == 0.0:
        raise DomainError("psi^E is not a function at x = 0")
    side = Side(branch)
    if (x > 0) != (side is Side.PLUS):
        return 0j
    lam = complex(_psi_exponent(E, p.gamma))
    return complex(np.exp(lam * math.log(abs(x)))) / math.sqrt(2 * math.pi * p.gamma)


def pair_F_psi(phi, E, branch, p: ModelParams, cfg=None, boundary=None):
    """``<F[psi^{-E}_branch], phi>`` (bilinear, vectorised over ``E``).

    Uses the closed-form transform of ``x^lambda_+-`` with
    ``lambda = iE/gamma - 1/2``; the boundary value ``(k +- i0)`` follows the
    branch unless ``boundary`` overrides it.
    """
    _check_lattice(E, p, +1, "F[psi^-E]")
    lam = 1j * np.asarray(E, dtype=complex) / p.gamma - 0.5
    val = dist.fourier_power_pairing(phi, lam, Side(branch), cfg, boundary=boundary)
    return val / math.sqrt(2 * math.pi * p.gamma)


def F_psi_pointwise(k, E, branch, p: ModelParams):
    """``F[psi^{-E}_branch](k)`` for real ``k != 0`` (vectorised over ``E``).

    ``(k +- i0)^alpha`` is ``k^alpha`` for ``k > 0`` and
    ``e^{+- i pi alpha} |k|^alpha`` for ``k < 0``.
    """
    k = float(k)
    if k == 0.0:
        raise DomainError("F[psi^-E] is singular at k = 0")
    s = Side(branch).sign
    lam = 1j * np.asarray(E, dtype=complex) / p.gamma - 0.5
    alpha = -lam - 1.0
    log_val = (s * 0.5j * math.pi * lam + log_gamma(lam + 1.0)
               + alpha * math.log(abs(k)))
    if k < 0:
        log_val = log_val + s * 1j * math.pi * alpha
    return s * 1j / (2 * math.pi * math.sqrt(p.gamma)) * np.exp(log_val)


def pair_F_psi_hermitian(phi, E, branch, p: ModelParams, cfg=None):
    """``int conj(F[psi^{-E}](k)) phi(k) dk`` for real ``E``."""
    if np.any(np.imag(E) != 0):
        raise InvalidParameterError("the hermitian pairing is defined for real energies only")
    return np.conj(pair_F_psi(conjugate(phi), E, branch, p, cfg))


def pair_energy(phi, point: EnergyPoint, p: ModelParams, cfg=None):
    """Bilinear pairing for any :class:`EnergyPoint` kind.

    ``Even``/``Odd`` are ``psi^E_+ +- psi^E_-`` (the ``|x|`` and
    ``sign(x)|x|`` powers) and ignore ``branch``.
    """
    kind = Kind(point.kind)
    if kind is Kind.PSI:
        return pair_psi_bilinear(phi, point.E, point.branch, p, cfg)
    if kind is Kind.FPSI:
        return pair_F_psi(phi, point.E, point.branch, p, cfg)
    plus = pair_psi_bilinear(phi, point.E, Side.PLUS, p, cfg)
    minus = pair_psi_bilinear(phi, point.E, Side.MINUS, p, cfg)
    return plus + minus if kind is Kind.EVEN else plus - minus


# ---------------------------------------------------------------------------
# resonant states


def pair_resonant(phi, r: ResonantState, cfg=None):
    """Bilinear ``<f^+-_n, phi>``: a scaled moment or a scaled derivative at 0."""
    n = int(r.n)
    norm = math.sqrt(math.factorial(n))
    if Family(r.sign) is Family.PLUS:
        return moment(phi, n, cfg) / norm
    return derivative_at(phi, 0.0, n) / norm


def gram_matrix(N):
    """``<f^+_n, f^-_m>`` for ``n, m <= N`` from the monomial/delta calculus.

    The derivatives of ``x^n`` at 0 come from exact jet arithmetic.
    """
    x = Jet.variable(0.0, N)
    G = np.empty((N + 1, N + 1))
    for n in range(N + 1):
        xn = x ** n
        for m in range(N + 1):
            # <(-1)^m delta^(m), x^n> = (-1)^m (-1)^m (x^n)^(m)(0)
            d = xn.derivative(m).real
            G[n, m] = d / math.sqrt(math.factorial(n) * math.factorial(m))
    return G


def H_action(phi: TestFunction, p: ModelParams) -> TestFunction:
    """``H phi = i gamma (x phi' + phi/2)`` with exact jets (one order lower)."""
    if phi.max_order < 1:
        raise CapabilityError("H_action needs first derivatives")
    g = p.gamma

    def evaluator(x):
        j = phi.jet_oracle(x, 1)
        return 1j * g * (x * j.coeffs[1] + 0.5 * j.coeffs[0])

    def jet_oracle(x0, k):
        j = phi.jet_oracle(x0, k + 1)
        out = Jet.variable(x0, k) * j.differentiate() + j.truncate(k) * 0.5
        return Jet(x0, out.coeffs * (1j * g))

    return TestFunction(
        evaluator, jet_oracle, phi.support, phi.class_tag, f"H[{phi.description}]",
        max_order=phi.max_order - 1, radius0=phi.radius0, scale=phi.scale,
        spec={"kind": "H", "gamma": g, "child": phi.spec}, knots=phi.knots,
    )


# ---------------------------------------------------------------------------
# residues


def _contour(center, p, radius):
    radius = p.gamma / 4.0 if radius is None else float(radius)
    if not radius < p.gamma / 2.0:
        raise ConfigError(
            f"contour radius {radius} >= gamma/2 would enclose more than one pole")
    return quad.Contour(center, radius, 64)


def contour_energy_integral(phi, center, branch, p, kind=Kind.PSI, cfg=None,
                            radius=None, tol=1e-11, max_nodes=1024):
    """``(1/2 pi i) \\oint`` of the bilinear pairing over a circle in the E plane."""
    c = _contour(complex(center), p, radius)
    if Kind(kind) is Kind.PSI:
        g = lambda E: pair_psi_bilinear(phi, E, branch, p, cfg)  # noqa: E731
    else:
        g = lambda E: pair_F_psi(phi, E, branch, p, cfg)  # noqa: E731
    return quad.contour_integral(g, c, tol=tol, max_nodes=max_nodes)


def residue_psi_pairing(phi, n, branch, p: ModelParams, cfg=None, radius=None,
                        tol=1e-11, max_nodes=1024):
    """Residue of ``E -> <psi^E_branch, phi>`` at ``E = -E_n`` by contour integration."""
    return contour_energy_integral(phi, -p.E(n), branch, p, Kind.PSI, cfg,
                                   radius, tol, max_nodes)


def residue_F_psi_pairing(phi, n, branch, p: ModelParams, cfg=None, radius=None,
                          tol=1e-11, max_nodes=1024):
    """Residue of ``E -> <F[psi^{-E}_branch], phi>`` at ``E = +E_n`` by contour integration."""
    return contour_energy_integral(phi, p.E(n), branch, p, Kind.FPSI, cfg,
                                   radius, tol, max_nodes)


def residue_psi_closed_form(phi, n, branch, p: ModelParams):
    """``<i (-+1)^n sqrt(gamma/2pi) delta^(n)/n!, phi>``."""
    s = (-1) ** n if Side(branch) is Side.PLUS else 1
    d = dist.pair_delta_derivative(phi, n)
    return 1j * s * math.sqrt(p.gamma / (2 * math.pi)) * d / math.factorial(n)


def residue_F_psi_closed_form(phi, n, branch, p: ModelParams, cfg=None):
    """``<+-(sqrt(gamma)/2pi) (-+i)^{n+1} ((-1)^n/n!) x^n, phi>``."""
    s = Side(branch).sign
    pref = s * math.sqrt(p.gamma) / (2 * math.pi) * (-s * 1j) ** (n + 1) * (-1) ** n / math.factorial(n)
    return pref * moment(phi, n, cfg)


__all__ = [
    "ModelParams", "Kind", "Family", "EnergyPoint", "ResonantState",
    "pair_psi_bilinear", "pair_psi_hermitian", "psi_pointwise", "pair_F_psi",
    "pair_F_psi_hermitian", "F_psi_pointwise", "pair_energy", "pair_resonant", "gram_matrix",
    "H_action", "contour_energy_integral", "residue_psi_pairing",
    "residue_F_psi_pairing", "residue_psi_closed_form", "residue_F_psi_closed_form",
]
