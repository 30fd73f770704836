"""Dilation dynamics, damping semigroups, discrete symmetries and the
classical Hamiltonian embedding.

The evolution generated by ``H = i gamma (x d/dx + 1/2)`` is the exact
dilation ``(U(t) phi)(x) = e^{gamma t/2} phi(e^{gamma t} x)``; it is applied
symbolically to evaluators and jets, never on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quad
from .eigen import ModelParams
from .errors import CapabilityError, ConfigError, DomainError, EvaluationError, InvalidParameterError
from .spectral import Basis, ResonanceExpansion
from .testfn import (Compact, TestFunction, add, dilate, fourier_poly_gauss, from_spec,
                     l2_norm_squared, make_fourier_of, reflect, scale)


@dataclass(frozen=True)
class EvolutionConfig:
    t: float = 0.0
    enforce_semigroup: bool = False

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ConfigError("evolution time must be finite")


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float


def evolve(phi: TestFunction, t, p: ModelParams = ModelParams()) -> TestFunction:
    """``x -> e^{gamma t/2} phi(e^{gamma t} x)``."""
    a = math.exp(p.gamma * t)
    return dilate(phi, a, math.sqrt(a))


def evolve_expansion(e: ResonanceExpansion, t=None, cfg: EvolutionConfig | None = None):
    """Exact coefficient law of the dilation group on either resonance basis.

    MinusBasis: ``c_n -> e^{-gamma(n+1/2)t} c_n`` (contracting for ``t >= 0``);
    PlusBasis: ``c_n -> e^{+gamma(n+1/2)t} c_n`` (contracting for ``t <= 0``).
    With ``cfg.enforce_semigroup`` only the contracting direction is allowed.
    """
    cfg = cfg or EvolutionConfig()
    t = cfg.t if t is None else float(t)
    if cfg.enforce_semigroup:
        if e.basis is Basis.MINUS and t < 0:
            raise DomainError("the MinusBasis semigroup U_-(t) is defined for t >= 0 only")
        if e.basis is Basis.PLUS and t > 0:
            raise DomainError("the PlusBasis semigroup U_+(t) is defined for t <= 0 only")
    n = np.arange(e.N + 1)
    sign = -1.0 if e.basis is Basis.MINUS else 1.0
    factor = np.exp(sign * e.gamma * (n + 0.5) * t)
    return ResonanceExpansion(e.gamma, e.basis, e.coeffs * factor, e.origin_tag)


def concentration_probability(phi, t, epsilon, p: ModelParams = ModelParams(), cfg=None):
    """``int_{-eps}^{eps} |phi_t|^2 / ||phi||^2`` via the window ``|x| <= eps e^{gamma t}``."""
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    cfg = cfg or quad.DEFAULT_CONFIG
    norm2 = l2_norm_squared(phi, cfg)
    if not norm2 > 0:
        raise DomainError("concentration needs a nonzero function")
    a = epsilon * math.exp(p.gamma * t)
    lo, hi = phi.bounds
    if phi.is_compact and -a <= lo and hi <= a:
        return 1.0
    lo_w, hi_w = max(lo, -a), min(hi, a)
    if not lo_w < hi_w:
        return 0.0
    n_pan = max(8, int(math.ceil((hi_w - lo_w) / phi.scale)))
    val, _ = quad.integrate(lambda x: np.abs(phi.evaluator(x)) ** 2, lo_w, hi_w, cfg,
                            breakpoints=np.linspace(lo_w, hi_w, n_pan + 1).tolist())
    return float(min(1.0, max(0.0, val.real / norm2)))


def time_reverse(phi: TestFunction) -> TestFunction:
    """``T phi = F[phi]`` (unitary Fourier transform).

    Supported: compactly supported functions (numerical transform with
    moment jets) and polynomial-Gaussians (closed form), plus sums, scalings
    and reflections of these.
    """
    kind = phi.spec.get("kind")
    if kind in ("gauss_hermite", "poly_gauss"):
        return fourier_poly_gauss(phi)
    if isinstance(phi.support, Compact):
        return make_fourier_of(phi)
    if kind == "sum":
        parts = [time_reverse(from_spec(c)) for c in phi.spec["children"]]
        out = parts[0]
        for q in parts[1:]:
            out = add(out, q)
        return out
    if kind == "scale":
        f = phi.spec["factor"]
        return scale(time_reverse(from_spec(phi.spec["child"])), complex(f[0], f[1]))
    if kind == "reflect":
        return reflect(time_reverse(from_spec(phi.spec["child"])))
    raise CapabilityError(f"no Fourier transform available for {phi.description}")


def parity(phi: TestFunction) -> TestFunction:
    """``P phi(x) = phi(-x)``."""
    return reflect(phi)


# ---------------------------------------------------------------------------
# classical picture


def classical_flow(s: ClassicalState, t, p: ModelParams = ModelParams()) -> ClassicalState:
    """Exact flow of ``H(x, p) = -gamma x p``: ``(e^{-gamma t} x, e^{gamma t} p)``."""
    return ClassicalState(math.exp(-p.gamma * t) * s.x, math.exp(p.gamma * t) * s.p)


@dataclass(frozen=True)
class EmbeddingReport:
    t: np.ndarray
    x: np.ndarray             # embedded-system positions, shape (steps+1, n)
    p: np.ndarray             # conjugate momenta
    x_direct: np.ndarray      # direct integration of x' = X(x)
    energy: np.ndarray        # H(x, p) = sum_k p_k X^k(x) along the trajectory
    x_deviation: float        # max |x - x_direct|
    energy_drift: float       # max |H - H(0)|


def _fd_jacobian(X, x):
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        h = 6e-6 * max(1.0, abs(x[j]))
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (np.asarray(X(x + e)) - np.asarray(X(x - e))) / (2 * h)
    return J


def _rk4(f, y0, dt, steps):
    ys = np.empty((steps + 1,) + y0.shape)
    ys[0] = y = y0
    for i in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise EvaluationError(f"trajectory left the finite range at step {i + 1}",
                                  location=(i + 1) * dt)
        ys[i + 1] = y
    return ys


def hamiltonian_embedding_check(Xfield: Callable, s, t, steps, jacobian: Callable | None = None):
    """Integrate ``x' = X(x), p' = -DX(x)^T p`` (the Hamilton equations of
    ``H = sum_k p_k X^k(x)``) with classical RK4 and compare with the direct
    integration of ``x' = X(x)``.

    ``s`` is an ``(x0, p0)`` pair of equal-length vectors; ``jacobian``
    defaults to central finite differences.
    """
    if int(steps) != steps or steps < 1:
        raise ConfigError("steps must be a positive integer")
    steps = int(steps)
    if not (math.isfinite(t) and t > 0):
        raise ConfigError("integration time must be positive and finite")
    x0 = np.atleast_1d(np.asarray(s[0], dtype=float))
    p0 = np.atleast_1d(np.asarray(s[1], dtype=float))
    if x0.shape != p0.shape or x0.ndim != 1:
        raise InvalidParameterError("x and p must be vectors of equal length")
    n = x0.size
    X = lambda x: np.atleast_1d(np.asarray(Xfield(x), dtype=float))  # noqa: E731
    jac = jacobian or (lambda x: _fd_jacobian(X, x))
    dt = t / steps

    def ham_rhs(y):
        x, p = y[:n], y[n:]
        J = np.atleast_2d(np.asarray(jac(x), dtype=float))
        return np.concatenate([X(x), -J.T @ p])

    ys = _rk4(ham_rhs, np.concatenate([x0, p0]), dt, steps)
    xd = _rk4(X, x0, dt, steps)
    xs, ps = ys[:, :n], ys[:, n:]
    energy = np.array([np.dot(pp, X(xx)) for xx, pp in zip(xs, ps)])
    return EmbeddingReport(
        t=np.linspace(0.0, t, steps + 1), x=xs, p=ps, x_direct=xd, energy=energy,
        x_deviation=float(np.max(np.abs(xs - xd))),
        energy_drift=float(np.max(np.abs(energy - energy[0]))),
    )


__all__ = [
    "EvolutionConfig", "ClassicalState", "EmbeddingReport", "evolve", "evolve_expansion",
    "concentration_probability", "time_reverse", "parity", "classical_flow",
    "hamiltonian_embedding_check",
]
