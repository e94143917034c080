"""Dispersion function, mode spectra, eigenmodes, threshold and verdicts."""

import cmath
import math

import numpy as np
import pytest

from cellwave import (
    ModelParams,
    ResidualError,
    bessel_I,
    bessel_J,
    bessel_J_roots,
    chi_c_star,
    classify,
    dispersion_H,
    dispersion_kernel,
    eigenmode,
    linear_undercooling,
    mode_spectrum,
    principal_eigenvalue_sweep,
    refine_threshold,
    threshold_slope_report,
    zero_eigenspace_dimension,
    zero_mode_basis,
)
from cellwave.stability import eigenmode_residual, structural_exponent


def _random_params(rng, f_act, chi_factor=None):
    p = ModelParams(a=rng.uniform(0.2, 1.0), gamma=rng.uniform(0.5, 3.0),
                    chi_c=0.0, chi_u=rng.uniform(0.0, 2.0),
                    R0=rng.uniform(0.5, 2.0),
                    M=rng.uniform(0.5, 2.0) * math.pi)
    if chi_factor is not None:
        star = chi_c_star(p, f_act, linear_undercooling())
        p = p.with_chi_c(chi_factor * star)
    return p


class TestDispersionFunction:
    def test_vanishes_at_origin(self, params, f_act, f_und):
        for m in range(9):
            assert dispersion_H(m, 0.0, params, f_act, f_und) == 0.0

    def test_mode0_closed_form(self, params, f_act, f_und):
        rng = np.random.default_rng(41)
        for _ in range(20):
            z = complex(rng.uniform(-30, 10), rng.uniform(-8, 8))
            got = dispersion_H(0, z, params, f_act, f_und)
            ref = z ** 1.5 * bessel_I(1, -params.R0 * cmath.sqrt(z))
            assert abs(got - ref) <= 1e-12 * (1.0 + abs(ref))

    def test_mode1_independent_transcription(self, params, f_act, f_und):
        # Fresh transcription of the displayed mode-1 function.
        c0 = params.c0
        coef = params.a * params.chi_c * c0 * float(f_act.d1(c0)) / params.R0
        b1 = 1.0 + params.chi_u * float(f_und.d1(0.0)) / params.R0
        rng = np.random.default_rng(42)
        for _ in range(20):
            z = complex(rng.uniform(-30, 10), rng.uniform(-8, 8))
            w = -params.R0 * cmath.sqrt(z)
            ref = (0.5 * z ** 1.5 * b1 * (bessel_I(0, w) + bessel_I(2, w))
                   + z * coef * bessel_I(1, w))
            got = dispersion_H(1, z, params, f_act, f_und)
            assert abs(got - ref) <= 1e-12 * (1.0 + abs(ref))

    def test_branch_independence(self, params, f_act, f_und):
        # Replacing sqrt(z) by -sqrt(z) scales the value by exactly (-1)^m.
        c0 = params.c0
        fp = float(f_act.d1(c0))
        fu = float(f_und.d1(0.0))
        rng = np.random.default_rng(43)
        for m in range(9):
            for _ in range(50):
                z = complex(rng.uniform(-30, 10), rng.uniform(-8, 8))
                sq = -cmath.sqrt(z)
                w = -params.R0 * sq
                coef = params.a * params.chi_c * c0 * fp / params.R0
                bm = 1.0 + m * params.chi_u * fu / params.R0
                dm = params.gamma * m * (m * m - 1) / params.R0 ** 3
                lo = bessel_I(1, w) if m == 0 else bessel_I(m - 1, w)
                flipped = (z * m * coef * bessel_I(m, w)
                           + 0.5 * sq * (z * bm + dm) * (lo + bessel_I(m + 1, w)))
                ref = dispersion_H(m, z, params, f_act, f_und)
                assert abs(ref - (-1.0) ** m * flipped) <= 1e-12 * (1 + abs(ref))

    def test_kernel_factorisation(self, params, f_act, f_und):
        # H_m(z) = z^e * kernel_m(z) with e the structural exponent.
        rng = np.random.default_rng(44)
        for m in range(9):
            for _ in range(6):
                z = complex(rng.uniform(-30, 10), rng.uniform(-8, 8))
                if abs(z) < 1e-2:
                    continue
                h = dispersion_H(m, z, params, f_act, f_und)
                val, _ = dispersion_kernel(m, z, params, f_act, f_und)
                ref = z ** structural_exponent(m) * val
                assert abs(h - ref) <= 1e-11 * (abs(h) + abs(ref) + 1e-300)

    def test_conjugate_symmetry(self, params, f_act, f_und):
        rng = np.random.default_rng(45)
        for m in range(5):
            for _ in range(6):
                z = complex(rng.uniform(-30, 5), rng.uniform(0.1, 8))
                a = dispersion_H(m, z, params, f_act, f_und)
                b = dispersion_H(m, z.conjugate(), params, f_act, f_und)
                assert abs(b - a.conjugate()) <= 1e-12 * (1.0 + abs(a))


class TestModeSpectrum:
    def test_mode0_matches_j1_roots(self, params, f_act, f_und):
        j1 = bessel_J_roots(1, 4)
        r2 = params.R0 ** 2
        region = (-1.05 * j1[3] ** 2 / r2, 0.5 / r2, -2.0, 2.0)
        spec = mode_spectrum(0, params, f_act, f_und, region=region)
        expected = sorted(-x * x / r2 for x in j1)
        assert len(spec.roots) == 4
        for got, ref in zip(spec.roots, expected):
            assert abs(got - ref) <= 1e-9

    def test_mode0_scaled_radius(self, f_act, f_und):
        p = ModelParams(a=0.6, gamma=2.0, chi_c=0.5, chi_u=1.0, R0=1.6,
                        M=2.0 * math.pi)
        j1 = bessel_J_roots(1, 2)
        spec = mode_spectrum(0, p, f_act, f_und)
        expected = sorted(-x * x / p.R0 ** 2 for x in j1)
        got = [z for z in spec.roots if z.real >= expected[0] - 1.0]
        for g, e in zip(got, expected):
            assert abs(g - e) <= 1e-9

    def test_mode1_subcritical_all_negative(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        spec = mode_spectrum(1, params.with_chi_c(0.8 * star), f_act, f_und)
        assert spec.roots
        assert all(z.real < 0 for z in spec.roots)

    def test_mode1_supercritical_single_positive(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        spec = mode_spectrum(1, params.with_chi_c(1.2 * star), f_act, f_und)
        positive = [z for z in spec.roots if z.real > 0]
        assert len(positive) == 1
        assert abs(positive[0]) < 2.0   # near the origin

    def test_roots_conjugate_closed(self, params, f_act, f_und):
        for m in range(6):
            spec = mode_spectrum(m, params, f_act, f_und)
            for z in spec.roots:
                if abs(z.imag) > 1e-8:
                    assert any(abs(z.conjugate() - w) <= 1e-6
                               for w in spec.roots)

    def test_residuals_recorded(self, params, f_act, f_und):
        spec = mode_spectrum(1, params, f_act, f_und)
        assert len(spec.residuals) == len(spec.roots)
        assert all(r <= 1e-9 for r in spec.residuals)


class TestZeroModes:
    def test_dimensions(self, params, f_act, f_und):
        dims = [zero_eigenspace_dimension(m, params, f_act, f_und)
                for m in range(9)]
        assert dims[0] == 2 and dims[1] == 1
        assert all(d == 0 for d in dims[2:])

    def test_dimensions_random_subcritical(self, f_act, f_und):
        rng = np.random.default_rng(46)
        for _ in range(5):
            p = _random_params(rng, f_act, chi_factor=rng.uniform(0.1, 0.9))
            total = sum(zero_eigenspace_dimension(m, p, f_act, f_und)
                        for m in (0, 1))
            assert total == 3

    def test_mode0_basis(self, params, f_act, f_und):
        modes = zero_mode_basis(0, params, f_act, f_und)
        assert len(modes) == 2
        rho_mode, c_mode = modes
        assert (rho_mode.rho_hat, rho_mode.c_hat) == (1.0, 0.0)
        assert abs(rho_mode.P_hat + params.gamma / params.R0 ** 2) <= 1e-15
        assert (c_mode.rho_hat, c_mode.c_hat) == (0.0, 1.0)
        assert abs(c_mode.P_hat
                   - params.chi_c * float(f_act.d1(params.c0))) <= 1e-15

    def test_mode1_translation(self, params, f_act, f_und):
        modes = eigenmode(1, 0.0, params, f_act, f_und)
        assert len(modes) == 1
        assert (modes[0].rho_hat, modes[0].c_hat, modes[0].P_hat) == (1, 0, 0)

    def test_mode2_empty(self, params, f_act, f_und):
        assert eigenmode(2, 0.0, params, f_act, f_und) == []


class TestEigenmodes:
    def test_mode0_profile_is_bessel_j(self, params, f_act, f_und):
        j1 = bessel_J_roots(1, 1)[0]
        lam = -(j1 / params.R0) ** 2
        mode = eigenmode(0, lam, params, f_act, f_und)[0]
        rr = np.linspace(0.0, params.R0, 17)
        prof = mode.concentration_profile(rr)
        ref = np.array([bessel_J(0, j1 * r / params.R0) for r in rr])
        scale = prof[0] / ref[0]
        assert np.max(np.abs(prof - scale * ref)) <= 1e-9
        # rho amplitude vanishes; pressure amplitude is chi_c f'(c0) J0(x11)
        assert abs(mode.rho_hat) <= 1e-12
        pred = params.chi_c * float(f_act.d1(params.c0)) * bessel_J(0, j1)
        assert abs(mode.P_hat - pred * mode.c_hat) <= 1e-10

    def test_relations_hold(self, params, f_act, f_und):
        for m in (0, 1, 2, 3):
            spec = mode_spectrum(m, params, f_act, f_und)
            for lam in spec.roots[:3]:
                for mode in eigenmode(m, lam, params, f_act, f_und):
                    assert eigenmode_residual(mode, params, f_act,
                                              f_und) <= 1e-9

    def test_normalisation(self, params, f_act, f_und):
        spec = mode_spectrum(1, params, f_act, f_und)
        mode = eigenmode(1, spec.principal, params, f_act, f_und)[0]
        mags = [abs(mode.rho_hat), abs(mode.c_hat), abs(mode.P_hat)]
        assert abs(max(mags) - 1.0) <= 1e-12

    def test_non_root_rejected(self, params, f_act, f_und):
        with pytest.raises(ResidualError):
            eigenmode(1, 3.7 + 0.1j, params, f_act, f_und)


class TestSweepAndThreshold:
    def test_threshold_matches_closed_form(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        located = refine_threshold(params, f_act, f_und, tol=1e-8)
        assert abs(located - star) / star <= 1e-6

    def test_doubling_chi_u_shifts_threshold(self, f_act):
        f_und = linear_undercooling()
        base = ModelParams(a=0.7, gamma=1.5, chi_c=0.0, chi_u=0.5, R0=1.2,
                           M=1.4 * math.pi)
        doubled = ModelParams(a=0.7, gamma=1.5, chi_c=0.0, chi_u=1.0, R0=1.2,
                              M=1.4 * math.pi)
        t1 = refine_threshold(base, f_act, f_und, tol=1e-8)
        t2 = refine_threshold(doubled, f_act, f_und, tol=1e-8)
        s1 = chi_c_star(base, f_act, f_und)
        s2 = chi_c_star(doubled, f_act, f_und)
        assert abs((t2 - t1) - (s2 - s1)) <= 1e-6 * s2

    def test_sweep_sign_change_brackets_threshold(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        grid = list(np.linspace(0.8 * star, 1.2 * star, 9))
        points = principal_eigenvalue_sweep(1, params, f_act, f_und, grid)
        res = [p.principal.real for p in points]
        signs = np.sign(res)
        flips = np.nonzero(np.diff(signs))[0]
        assert len(flips) == 1
        lo, hi = grid[flips[0]], grid[flips[0] + 1]
        assert lo <= star <= hi

    def test_sweep_at_zero_activity(self, params, f_act, f_und):
        points = principal_eigenvalue_sweep(1, params.with_chi_c(0.0),
                                            f_act, f_und, [0.0, 0.5])
        first = points[0].principal
        assert first is not None
        assert first.real < 0 and abs(first.imag) <= 1e-8

    def test_sweep_requires_sorted_grid(self, params, f_act, f_und):
        with pytest.raises(ValueError):
            principal_eigenvalue_sweep(1, params, f_act, f_und, [1.0, 0.5])


class TestClassify:
    def test_subcritical_stable(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        report = classify(params.with_chi_c(0.5 * star), f_act, f_und)
        assert report.stable

    def test_supercritical_unstable_mode1(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        report = classify(params.with_chi_c(2.0 * star), f_act, f_und)
        assert not report.stable
        assert report.margin_mode == 1
        assert report.margin > 0

    def test_neutral_at_threshold(self, params, f_act, f_und):
        star = chi_c_star(params, f_act, f_und)
        report = classify(params.with_chi_c(star), f_act, f_und)
        assert abs(report.margin) <= 1e-6

    def test_mmax_validation(self, params, f_act, f_und):
        with pytest.raises(ValueError):
            classify(params, f_act, f_und, m_max=1)


class TestOpenQuestions:
    def test_slope_matches_quadratic_expansion(self, params, f_act, f_und):
        # Two closed forms circulate for the near-threshold principal rate;
        # with chi_u > 0 they differ by the undercooling factor and the
        # numerics resolve the discrepancy (frozen empirical outcome).
        report = threshold_slope_report(params, f_act, f_und)
        assert report["verdict"] == "quadratic_expansion"
        assert report["relative_mismatch"]["quadratic_expansion"] <= 1e-4
        assert report["relative_mismatch"]["displayed_leading_rate"] >= 0.1

    def test_slope_candidates_coincide_without_undercooling(self, f_act,
                                                            f_und):
        p = ModelParams(a=0.8, gamma=2.0, chi_c=0.5, chi_u=0.0, R0=1.0,
                        M=math.pi)
        report = threshold_slope_report(p, f_act, f_und)
        assert report["verdict"] == "indistinguishable"

    def test_extended_range_report(self, f_act, f_und):
        # The proven non-positive-spectrum range stops at 1/(a c0 f'(c0));
        # whether it extends to the full subcritical interval is unproven.
        # Scan the gap empirically and report; nothing in the library
        # depends on the outcome.
        rng = np.random.default_rng(47)
        worst = -math.inf
        for _ in range(4):
            p = _random_params(rng, f_act)
            star = chi_c_star(p, f_act, f_und)
            bound = 1.0 / (p.a * p.c0 * float(f_act.d1(p.c0)))
            if bound >= star:
                continue
            chi = rng.uniform(bound, star)
            for m in range(1, 5):
                spec = mode_spectrum(m, p.with_chi_c(chi), f_act, f_und)
                for z in spec.roots:
                    worst = max(worst, z.real)
        assert math.isfinite(worst)
        print(f"extended-range scan: max Re(lambda) = {worst:.3e} "
              f"(conjectured <= 0)")
