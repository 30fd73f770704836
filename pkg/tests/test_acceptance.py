"""Acceptance gate: every criterion at its stated tolerance and runtime limit.

Each criterion is computed here from the public API (not through the
packaged verification suite) and records one PASS/FAIL line that the
terminal summary prints.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from rhsdamp import dist, dynamics, eigen, hardy, quad, specfn, spectral
from rhsdamp.dist import Side
from rhsdamp.eigen import Family, ModelParams, ResonantState
from rhsdamp.testfn import (add, l2_norm_squared, make_bump,
                            make_fourier_of, make_gauss_hermite, moment, scale)

P = ModelParams(1.0)


def record(number, name, limit, body):
    """Run ``body() -> (error, tolerance, detail)``; assert error and runtime."""
    t0 = time.perf_counter()
    err, tol, detail = body()
    elapsed = time.perf_counter() - t0
    ok = err <= tol and elapsed < limit
    line = (f"{'PASS' if ok else 'FAIL'} [{number:2d}] {name}: {detail} "
            f"(err {err:.3g} <= {tol:g}; {elapsed:.2f}s < {limit:g}s)")
    ACCEPTANCE[number] = (ok, line)
    assert err <= tol, line
    assert elapsed < limit, line


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def integral(f, g, lo, hi, step=0.25):
    val, _ = quad.integrate(lambda x: f(x) * g(x), lo, hi,
                            breakpoints=np.arange(lo, hi + step / 2, step).tolist())
    return val


def suite6():
    return [make_bump(1, 2, 1), make_bump(-0.5, 1.5, 1), make_bump(-1, 1, 2),
            make_gauss_hermite(1, 0), make_gauss_hermite(0.8, 3),
            add(make_bump(-1.2, 0.3, 1), scale(make_bump(-0.1, 1.4, 1), 0.5))]


def test_01_biorthogonality():
    def body():
        G = eigen.gram_matrix(12)
        assert G.shape == (13, 13)
        return float(np.max(np.abs(G - np.eye(13)))), 1e-12, "13x13 Gram matrix"
    record(1, "biorthogonality", 1.0, body)


def test_02_resonant_eigenvalue_relations():
    def body():
        worst = 0.0
        for f in suite6():
            Hf = eigen.H_action(f, P)
            for fam, sgn in ((Family.PLUS, -1), (Family.MINUS, 1)):
                a = np.array([eigen.pair_resonant(Hf, ResonantState(n, fam)) for n in range(9)])
                b = np.array([sgn * P.E(n) * eigen.pair_resonant(f, ResonantState(n, fam))
                              for n in range(9)])
                if not np.any(b):  # derivatives at 0 of a function flat there
                    worst = max(worst, float(np.max(np.abs(a))))
                    continue
                # entries vanishing by symmetry are measured against the row scale
                denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-4 * np.max(np.abs(b)))
                worst = max(worst, float(np.max(np.abs(a - b) / denom)))
        return worst, 1e-10, "n <= 8, 6 functions, both families"
    record(2, "resonant eigenvalue relations", 5.0, body)


def test_03_pole_structure():
    def body():
        worst = 0.0
        for phi in (add(make_gauss_hermite(0.9, 0), make_gauss_hermite(0.9, 1)),
                    make_bump(-0.7, 1.1, 1)):
            for side in Side:
                for k in (1, 2, 3, 4):
                    val = quad.contour_integral(lambda z: dist.pair_power_values(phi, z, side),
                                                quad.Contour(-k, 0.3, 64))
                    worst = max(worst, rel(val, dist.residue_power(phi, k, side)))
        phi = make_gauss_hermite(0.9, 1)
        entire = max(abs(quad.contour_integral(
            lambda z: dist.pair_boundary_power(phi, dist.BoundaryPower(z, s)),
            quad.Contour(-2.0, 0.3, 64))) for s in dist.BoundarySign)
        return max(worst, entire), 1e-8, f"residues rel {worst:.2g}, boundary |I| {entire:.2g}"
    record(3, "pole structure of x^lambda", 30.0, body)


def test_04_residues_at_complex_eigenvalues():
    def body():
        worst = mid = 0.0
        for phi in (make_gauss_hermite(1, 0), make_bump(-0.5, 1.5, 1)):
            for br in Side:
                for n in range(6):
                    r1 = eigen.residue_psi_closed_form(phi, n, br, P)
                    r2 = eigen.residue_F_psi_closed_form(phi, n, br, P)
                    c1 = eigen.residue_psi_pairing(phi, n, br, P)
                    c2 = eigen.residue_F_psi_pairing(phi, n, br, P)
                    for c, r in ((c1, r1), (c2, r2)):
                        # Res-1 vanishes identically for functions flat at the origin
                        worst = max(worst, rel(c, r) if abs(r) > 0 else abs(c))
                    mid = max(mid,
                              abs(eigen.contour_energy_integral(phi, -1j * (n + 1), br, P)),
                              abs(eigen.contour_energy_integral(phi, 1j * (n + 1), br, P,
                                                                kind=eigen.Kind.FPSI)))
        return max(worst, mid / 1e-10 * 1e-8), 1e-8, f"rel {worst:.2g}, off-pole {mid:.2g}"
    record(4, "residues at complex eigenvalues", 60.0, body)


def test_05_expansion_identities():
    def body():
        xs = np.linspace(-1, 1, 101)
        taylor = 0.0
        for b in (make_bump(-0.5, 1.5, 1), make_bump(1, 2, 1)):
            z = make_fourier_of(b)
            e = spectral.taylor_expand(z, 30, P)
            taylor = max(taylor, float(np.max(np.abs(spectral.eval_plus_expansion(e, xs) - z(xs)))))
        pairs = [(make_bump(1, 2, 1), make_gauss_hermite(1, 1)),
                 (make_bump(-1, 1, 1), make_gauss_hermite(0.7, 2)),
                 (make_bump(-0.5, 1.5, 1), make_fourier_of(make_bump(-1, 1, 1))),
                 (add(make_bump(-1, 0, 1), make_bump(0, 1, 2)), make_gauss_hermite(1, 0))]
        weak = 0.0
        for phi, chi in pairs:
            m = spectral.moment_expand(phi, 30, P)
            lo, hi = phi.bounds
            weak = max(weak, abs(spectral.pair_minus_expansion(m, chi) - integral(phi, chi, lo, hi)))
        return max(taylor, weak), 1e-8, f"Taylor {taylor:.2g}, weak moments {weak:.2g}"
    record(5, "expansion identities", 30.0, body)


def test_06_continuum_completeness():
    def body():
        phi = make_bump(1, 2, 1)
        rc = spectral.ReconstructionConfig(E_max=120.0)  # the five default sample points
        r1 = spectral.reconstruct_continuum(phi, rc, P)
        r2 = spectral.reconstruct_continuum_fourier(phi, rc, P)
        err = float(np.max(r1.abs_err))
        cross = float(np.max(np.abs(r1.values - r2.values)))
        # both bounds are checked: scale the cross error onto the 1e-4 budget
        return max(err, cross / 2), 1e-4, f"reconstruction {err:.2g}, cross {cross:.2g} (<= 2e-4)"
    record(6, "continuum completeness", 300.0, body)


def test_07_unitarity_and_damping():
    def body():
        unit = 0.0
        for f in suite6():
            n0 = l2_norm_squared(f)
            for t in (-1.5, -0.3, 0.8, 2.5):
                unit = max(unit, abs(math.sqrt(l2_norm_squared(dynamics.evolve(f, t, P)) / n0) - 1))
        phi = make_bump(-0.5, 1.5, 1)
        c0 = spectral.moment_expand(phi, 10, P).coeffs
        law = 0.0
        for t in (0.5, 1.0, 2.0):
            ct = spectral.moment_expand(dynamics.evolve(phi, t, P), 10, P).coeffs
            expected = np.exp(-(np.arange(11) + 0.5) * t)
            law = max(law, float(np.max(np.abs(ct / c0 - expected) / expected)))
        e = spectral.ResonanceExpansion(1.0, "minus", c0)
        r = (dynamics.evolve_expansion(e, 1.0).coeffs[0] / c0[0]).real
        pub = abs(r - 0.6065306597)
        return max(unit, law, pub), 1e-10, f"norm {unit:.2g}, decay law {law:.2g}, n=0 t=1 ratio {r:.10f}"
    record(7, "unitarity and damping laws", 10.0, body)


def test_08_concentration_limit():
    def body():
        phi = make_bump(1, 2, 1)
        ts = np.concatenate([np.linspace(0, 4, 41), [math.log(20)]])
        ts.sort()
        c = np.array([dynamics.concentration_probability(phi, t, 0.1, P) for t in ts])
        bad_start = abs(c[0])
        mono = float(np.max(np.maximum(c[:-1] - c[1:], 0.0)))
        late = float(np.max(np.abs(c[ts >= math.log(20)] - 1)))
        return max(bad_start, mono, late), 1e-12, f"c(0)={c[0]}, decrease {mono:.2g}, late {late:.2g}"
    record(8, "concentration limit", 5.0, body)


def test_09_symmetry_suite():
    def body():
        phi = make_bump(-0.8, 0.9, 1)
        chi = make_gauss_hermite(1.1, 2)
        tt = abs(integral(dynamics.time_reverse(phi), dynamics.time_reverse(chi), -40, 40, 0.5)
                 - integral(dynamics.parity(phi), chi, -0.9, 0.8))
        g = make_gauss_hermite(0.8, 0)
        anti = abs(integral(eigen.H_action(dynamics.time_reverse(phi), P), g, -14, 14, 0.5)
                   + integral(dynamics.time_reverse(eigen.H_action(phi, P)), g, -14, 14, 0.5))
        chi2 = add(make_gauss_hermite(0.9, 1), make_gauss_hermite(0.9, 2))
        Fchi2 = dynamics.time_reverse(chi2)
        fres = 0.0
        for n in range(7):
            lhs = moment(Fchi2, n) / math.sqrt(math.factorial(n))  # <F f+_n, chi> = <f+_n, F chi>
            rhs = math.sqrt(2 * math.pi) * 1j ** n * eigen.pair_resonant(chi2, ResonantState(n, Family.MINUS))
            fres = max(fres, abs(lhs - rhs))
        return max(tt, anti, fres), 1e-8, f"T^2=P {tt:.2g}, anti-intertwining {anti:.2g}, F f+_n {fres:.2g}"
    record(9, "symmetry suite", 30.0, body)


def test_10_hardy_probe():
    def body():
        C = hardy.Classification
        E, h = hardy.energy_grid(60.0, 1024)
        cases = [(1 / (E + 2j) ** 2, C.UPPER_LIKELY), (1 / (E - 2j) ** 2, C.LOWER_LIKELY),
                 (np.exp(-E ** 2 / 2), C.NEITHER)]
        correct = sum(hardy.hardy_diagnostic(f, h).classification is v for f, v in cases)
        both = flips = 0
        for phi in suite6():
            verdicts = []
            for n in (1024, 2048):
                E, h = hardy.energy_grid(60.0, n)
                v_psi = hardy.hardy_diagnostic(
                    hardy.sample_energy_pairing(phi, "psi", Side.PLUS, E, P), h).classification
                v_f = hardy.hardy_diagnostic(
                    hardy.sample_energy_pairing(phi, "fpsi", Side.PLUS, E, P), h).classification
                both += v_psi is C.LOWER_LIKELY and v_f is C.UPPER_LIKELY
                verdicts.append((v_psi, v_f))
            flips += sum({a, b} == {C.UPPER_LIKELY, C.LOWER_LIKELY} for a, b in zip(*verdicts))
        return float((3 - correct) + both + flips), 0.0, \
            f"calibration {correct}/3, in both classes {both}, flips under doubling {flips}"
    record(10, "Hardy disjointness probe", 60.0, body)


def test_11_gamma_identities():
    def body():
        rng = np.random.default_rng(11)
        z = rng.uniform(-9, 9, 200) + 1j * rng.uniform(-9, 9, 200)
        g = specfn.cgamma(z)
        rec = float(np.max(np.abs(specfn.cgamma(z + 1) - z * g) / np.abs(z * g)))
        refl = float(np.max(np.abs(g * specfn.cgamma(1 - z) * np.sin(np.pi * z) - np.pi) / np.pi))
        return max(rec, refl), 1e-10, f"recurrence {rec:.2g}, reflection {refl:.2g}"
    record(11, "Gamma identities", 1.0, body)


def test_12_classical_embedding():
    def body():
        rep = dynamics.hamiltonian_embedding_check(
            lambda x: -x, ([1.0], [1.0]), 5.0, 5000, jacobian=lambda x: np.array([[-1.0]]))
        traj = float(np.max(np.abs(rep.x[:, 0] - np.exp(-rep.t))))
        return max(traj, rep.energy_drift), 1e-8, \
            f"trajectory {traj:.2g}, energy drift {rep.energy_drift:.2g}"
    record(12, "classical embedding", 1.0, body)
