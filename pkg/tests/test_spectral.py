import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rhsdamp import eigen, quad, spectral
from rhsdamp.eigen import ModelParams
from rhsdamp.errors import (AccuracyError, CapabilityError, ClassViolationError, ConfigError,
                            DomainError, InvalidParameterError)
from rhsdamp.spectral import Basis, ReconstructionConfig, ResonanceExpansion
from rhsdamp.testfn import make_bump, make_fourier_of, make_gauss_hermite, moment

P = ModelParams(1.0)
XS = np.linspace(-1, 1, 81)


@pytest.fixture(scope="module")
def z_even():
    return make_fourier_of(make_bump(-1, 1, 1))


@pytest.fixture(scope="module")
def z_skew():
    return make_fourier_of(make_bump(-0.5, 1.5, 1))


@pytest.fixture(scope="module")
def recon():
    phi = make_bump(1, 2, 1)
    rc = ReconstructionConfig(E_max=120.0)
    return spectral.reconstruct_continuum(phi, rc, P), spectral.reconstruct_continuum_fourier(phi, rc, P)


class TestExpansionObject:
    def test_coerces(self):
        e = ResonanceExpansion(1.0, "plus", [1, 2])
        assert e.basis is Basis.PLUS and e.coeffs.dtype == complex and e.N == 1

    def test_rejects(self):
        with pytest.raises(InvalidParameterError):
            ResonanceExpansion(1.0, Basis.PLUS, [])
        with pytest.raises(InvalidParameterError):
            ResonanceExpansion(0.0, Basis.PLUS, [1])


class TestTaylor:
    def test_round_trip(self, z_even, z_skew):
        for f in (z_even, z_skew):
            e = spectral.taylor_expand(f, 30, P)
            assert np.max(np.abs(spectral.eval_plus_expansion(e, XS) - f(XS))) <= 1e-8

    def test_even_function_has_no_odd_terms(self, z_even):
        c = spectral.taylor_expand(z_even, 30, P).coeffs
        assert np.max(np.abs(c[1::2])) <= 1e-14 * np.max(np.abs(c))

    def test_first_coefficient_is_scaled_mean(self, z_skew):
        # d/dk of (2 pi)^{-1/2} int e^{ikx} phi dx at k = 0 is i m_1 / sqrt(2 pi)
        c = spectral.taylor_expand(z_skew, 4, P).coeffs
        m1 = moment(make_bump(-0.5, 1.5, 1), 1)
        assert c[1] == pytest.approx(1j * m1 / math.sqrt(2 * math.pi), rel=1e-10)

    def test_sign_flipped_series_fails(self, z_skew):
        e = spectral.taylor_expand(z_skew, 30, P)
        flipped = ResonanceExpansion(1.0, Basis.PLUS, e.coeffs * (-1.0) ** np.arange(31))
        assert np.max(np.abs(spectral.eval_plus_expansion(flipped, XS) - z_skew(XS))) > 1e-3

    def test_tail_estimate(self, z_skew):
        e = spectral.taylor_expand(z_skew, 30, P)
        r = spectral.eval_plus_expansion(e, 0.7, with_tail=True)
        assert isinstance(r.value, complex)
        assert 0 <= r.tail < 1e-8
        assert abs(r.value - z_skew(0.7)) < 1e-10

    def test_tail_of_diverging_series(self):
        e = ResonanceExpansion(1.0, Basis.PLUS, np.sqrt([math.factorial(n) for n in range(12)]))
        assert spectral.eval_plus_expansion(e, 2.0, with_tail=True).tail == math.inf

    def test_class_guards(self, z_even):
        with pytest.raises(ClassViolationError):
            spectral.taylor_expand(make_bump(-1, 1), 5)
        with pytest.raises(ClassViolationError):
            spectral.taylor_expand(make_gauss_hermite(1, 0), 5)
        with pytest.raises(CapabilityError):
            spectral.taylor_expand(z_even, z_even.max_order + 1)

    def test_class_violation_is_domain_error(self):
        assert issubclass(ClassViolationError, DomainError)


class TestMoments:
    @pytest.mark.parametrize("phi,chi", [
        (make_bump(-1, 1, 1), make_gauss_hermite(1, 0)),
        (make_bump(1, 2, 1), make_gauss_hermite(2, 0)),
        (make_bump(-0.5, 1.5, 1), make_gauss_hermite(1.5, 1)),
    ])
    def test_weak_identity(self, phi, chi):
        m = spectral.moment_expand(phi, 30, P)
        lo, hi = phi.bounds
        ref, _ = quad.integrate(lambda x: phi(x) * chi(x), lo, hi,
                                breakpoints=np.linspace(lo, hi, 17).tolist())
        assert abs(spectral.pair_minus_expansion(m, chi) - ref) <= 1e-8

    def test_weak_identity_against_entire_function(self, z_even):
        phi = make_bump(-1.3, 0.6, 2)
        m = spectral.moment_expand(phi, 30, P)
        ref, _ = quad.integrate(lambda x: phi(x) * z_even(x), -1.3, 0.6,
                                breakpoints=np.linspace(-1.3, 0.6, 17).tolist())
        assert abs(spectral.pair_minus_expansion(m, z_even) - ref) <= 1e-8

    def test_coefficients_are_resonant_pairings(self):
        phi = make_bump(-0.5, 1.5)
        m = spectral.moment_expand(phi, 8, P)
        for n in range(9):
            ref = eigen.pair_resonant(phi, eigen.ResonantState(n, eigen.Family.PLUS))
            assert m.coeffs[n] == pytest.approx(ref, rel=1e-14)

    def test_guards(self):
        m = spectral.moment_expand(make_bump(-1, 1), 4)
        with pytest.raises(DomainError):
            spectral.eval_plus_expansion(m, 0.3)
        with pytest.raises(ClassViolationError):
            spectral.moment_expand(make_gauss_hermite(1, 0), 4)
        e = ResonanceExpansion(1.0, Basis.PLUS, [1.0])
        with pytest.raises(DomainError):
            spectral.pair_minus_expansion(e, make_gauss_hermite(1, 0))


class TestApplyH:
    def test_minus_basis_matches_H_action(self):
        phi = make_bump(-0.5, 1.5)
        a = spectral.apply_H(spectral.moment_expand(phi, 10, P)).coeffs
        b = spectral.moment_expand(eigen.H_action(phi, P), 10, P).coeffs
        assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-10

    def test_plus_basis_matches_H_action(self, z_skew):
        a = spectral.apply_H(spectral.taylor_expand(z_skew, 12, P)).coeffs
        b = spectral.taylor_expand(eigen.H_action(z_skew, P), 12, P).coeffs
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))

    @given(st.floats(0.1, 5.0))
    def test_twice(self, g):
        e = ResonanceExpansion(g, Basis.MINUS, np.ones(5))
        n = np.arange(5)
        assert np.allclose(spectral.apply_H(spectral.apply_H(e)).coeffs, -(g * (n + 0.5)) ** 2)


class TestReconstruction:
    def test_psi_family(self, recon):
        r, _ = recon
        assert r.family == "psi"
        assert np.max(r.abs_err) <= 1e-4

    def test_cross_family(self, recon):
        r1, r2 = recon
        assert r2.family == "fourier_psi"
        assert np.max(np.abs(r1.values - r2.values)) <= 2e-4

    def test_gap_region(self, recon):
        r, _ = recon
        gap = r.x < 1
        assert np.all(r.target[gap] == 0)
        assert np.max(np.abs(r.values[gap])) <= 1e-4

    def test_tail_is_reported(self, recon):
        r, _ = recon
        assert np.all(np.isfinite(r.tail)) and np.all(r.tail >= 0)

    def test_other_half_line(self):
        rc = ReconstructionConfig(E_max=120.0, x_samples=(-1.5, -0.7))
        r = spectral.reconstruct_continuum(make_bump(-2, -1, 1), rc, P)
        assert np.max(r.abs_err) <= 1e-4

    def test_convergence_in_E_max(self):
        phi = make_bump(1, 2, 1)
        errs = [np.max(spectral.reconstruct_continuum(
            phi, ReconstructionConfig(E_max=E, x_samples=(1.3, 1.5)), P).abs_err) for E in (20, 60, 120)]
        assert errs[0] > errs[1] > errs[2]

    @pytest.mark.parametrize("phi", [make_bump(1, 2, 1), make_bump(-0.5, 1.5, 1),
                                     make_bump(-1.3, 0.6, 2), make_bump(-1, 1, 1)])
    def test_error_decreases_with_E_max(self, phi):
        errs = [np.max(spectral.reconstruct_continuum(phi, ReconstructionConfig(E_max=E), P).abs_err)
                for E in (40, 60, 80, 100, 120)]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert errs[-1] <= 1e-4

    def test_gaussian_both_families(self):
        rc = ReconstructionConfig(E_max=150.0, E_nodes=3000, x_samples=(1.0,))
        g = make_gauss_hermite(1, 0)
        for run in (spectral.reconstruct_continuum, spectral.reconstruct_continuum_fourier):
            r = run(g, rc, P)
            assert abs(r.values[0] - math.exp(-0.5)) <= 1e-3

    def test_tail_tolerance(self):
        with pytest.raises(AccuracyError):
            spectral.reconstruct_continuum(make_bump(1, 2, 1),
                                           ReconstructionConfig(E_max=10.0, tail_tol=1e-12), P)

    @pytest.mark.parametrize("kw,err", [
        ({"E_max": 0.0}, ConfigError), ({"E_nodes": 10}, ConfigError),
        ({"E_nodes": 100.5}, ConfigError), ({"x_samples": ()}, ConfigError),
        ({"x_samples": (0.0, 1.0)}, DomainError), ({"tail_tol": -1.0}, ConfigError),
    ])
    def test_config_validation(self, kw, err):
        with pytest.raises(err):
            ReconstructionConfig(**kw)
