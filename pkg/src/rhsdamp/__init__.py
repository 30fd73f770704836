"""Resonant states of the damped-oscillator dilation model on a rigged
Hilbert space: distributions, energy eigenfunctions, resonance expansions,
damping semigroups and Hardy-class diagnostics, all computed numerically
and cross-checked against closed forms.
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, CapabilityError, ClassViolationError, ConfigError,
                     DomainError, EvaluationError, InvalidIntervalError, InvalidParameterError,
                     PoleError, RHSError)
from .quad import QuadratureConfig, integrate
from .specfn import gamma, log_gamma, cgamma
from .testfn import (TestFunction, make_bump, make_gauss_hermite, make_fourier_of, from_spec,
                     moment, derivative_at)
from .dist import (Side, Parity, BoundarySign, PowerDistribution, BoundaryPower, pair_power,
                   residue_power, pair_boundary_power, fourier_power_pairing)
from .eigen import (ModelParams, EnergyPoint, ResonantState, gram_matrix, H_action,
                    pair_energy, pair_resonant)
from .spectral import (Basis, ResonanceExpansion, ReconstructionConfig, taylor_expand,
                       moment_expand, reconstruct_continuum, reconstruct_continuum_fourier)
from .dynamics import (EvolutionConfig, ClassicalState, evolve, evolve_expansion,
                       concentration_probability, time_reverse, parity, classical_flow,
                       hamiltonian_embedding_check)
from .hardy import Classification, HalfPlane, HardyReport, hardy_diagnostic
