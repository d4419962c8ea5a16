import numpy as np
import pytest
from numpy.testing import assert_allclose

from cavityscan.cavity import (CavityParams, cavity_channel, cavity_symplectic,
                               chi_mm, chi_mm_sq, chi_mm_sq_expanded, chi_ms,
                               chi_ms_sq, chi_ms_sq_expanded, mixing_angles,
                               susceptibility, theta_mm_slope)
from cavityscan.gaussian import (GaussianState, apply_channel, apply_symplectic,
                                 reduce_to_channel)

from conftest import random_physical_cov


def random_params(rng, gamma_s_max=1e-3):
    return CavityParams(gamma_ell=rng.uniform(0.2, 3.0),
                        gamma_m=rng.uniform(0.0, 10.0),
                        gamma_s=rng.uniform(0.0, gamma_s_max),
                        n_t_bar=rng.uniform(0.0, 2.0))


class TestSusceptibility:
    def test_unitarity_batch(self, rng):
        # Acceptance-grade check lives in test_acceptance; spot version here.
        for _ in range(200):
            p = random_params(rng, gamma_s_max=1.0)
            chi = susceptibility(p, rng.uniform(-50.0, 50.0))
            assert np.abs(chi.conj().T @ chi - np.eye(3)).max() < 1e-12

    def test_row_normalization(self, rng):
        p = random_params(rng)
        omega = 0.83
        chi = susceptibility(p, omega)
        assert abs(np.sum(np.abs(chi[0]) ** 2) - 1.0) < 1e-12
        total = chi_mm_sq(p, omega) + chi_ms_sq(p, omega) \
            + p.gamma_m * p.gamma_ell / ((p.gamma / 2) ** 2 + omega**2)
        assert abs(total - 1.0) < 1e-12

    def test_critical_coupling_on_resonance_kills_reflection(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=1.0, gamma_s=0.0)
        assert abs(chi_mm(p, 0.0)) < 1e-15

    def test_far_detuned_matrix_is_identity(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=2.0, gamma_s=1e-6)
        assert np.abs(susceptibility(p, 1e9) - np.eye(3)).max() < 1e-8

    def test_signal_transmission_expanded_value(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=2.0, gamma_s=1e-6)
        expected = 2.0 * 1e-6 / 2.25  # gamma_m*gamma_s / ((gamma_m+gamma_ell)/2)^2
        assert_allclose(chi_ms_sq_expanded(p, 0.0), expected, rtol=1e-15)

    def test_exact_vs_expanded_small_signal_coupling(self, rng):
        for _ in range(200):
            p = CavityParams(gamma_ell=rng.uniform(0.5, 2.0),
                             gamma_m=rng.uniform(0.5, 8.0), gamma_s=1e-8)
            w = rng.uniform(-5.0, 5.0)
            assert abs(chi_mm_sq(p, w) / chi_mm_sq_expanded(p, w) - 1.0) < 1e-6
            assert abs(chi_ms_sq(p, w) / chi_ms_sq_expanded(p, w) - 1.0) < 1e-6

    def test_expanded_forms_guard_large_gamma_s(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=1.0, gamma_s=0.1)
        with pytest.raises(ValueError):
            chi_mm_sq_expanded(p, 0.0)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            CavityParams(gamma_ell=0.0, gamma_m=1.0)
        with pytest.raises(ValueError):
            CavityParams(gamma_ell=1.0, gamma_m=-1.0)
        with pytest.raises(ValueError):
            CavityParams(gamma_ell=1.0, gamma_m=1.0, delta_a=0.0)


class TestMixingAngles:
    def test_sine_closed_forms(self, rng):
        for _ in range(300):
            p = random_params(rng)
            w = rng.uniform(-8.0, 8.0)
            theta_mm, theta_ms = mixing_angles(p, w)
            assert abs(np.sin(theta_ms) - w / np.hypot(p.gamma / 2, w)) < 1e-12
            denom = np.hypot(p.gamma / 2 - p.gamma_m, w) * np.hypot(p.gamma / 2, w)
            if denom > 1e-12:
                expected = w * p.gamma_m / denom
                assert abs(np.sin(theta_mm) - expected) < 1e-10

    def test_angles_reproduce_complex_entries(self, rng):
        p = random_params(rng)
        w = 1.37
        theta_mm, theta_ms = mixing_angles(p, w)
        assert_allclose(abs(chi_mm(p, w)) * np.exp(1j * theta_mm), chi_mm(p, w), rtol=1e-12)
        assert_allclose(abs(chi_ms(p, w)) * np.exp(1j * theta_ms), chi_ms(p, w), rtol=1e-12)

    def test_oddness_away_from_branch_point(self, rng):
        # Principal values are odd in omega wherever they are continuous; the
        # documented exception is the +/- pi wrap of theta_ms through omega=0.
        for _ in range(100):
            p = random_params(rng)
            w = rng.uniform(0.05, 6.0)
            tp = mixing_angles(p, w)
            tm = mixing_angles(p, -w)
            assert abs(np.sin(tp[0]) + np.sin(tm[0])) < 1e-12
            assert abs(np.sin(tp[1]) + np.sin(tm[1])) < 1e-12
            assert abs(np.cos(tp[0]) - np.cos(tm[0])) < 1e-12
            assert abs(np.cos(tp[1]) - np.cos(tm[1])) < 1e-12

    def test_under_coupled_resonance_angles(self):
        # For gamma_m < gamma_ell the reflection is real positive on resonance.
        p = CavityParams(gamma_ell=2.0, gamma_m=1.0, gamma_s=1e-9)
        theta_mm, theta_ms = mixing_angles(p, 0.0)
        assert theta_mm == 0.0
        # chi_ms is real negative at all couplings, so its principal angle is pi.
        assert abs(theta_ms) == pytest.approx(np.pi)

    def test_removable_singularity_convention(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=1.0, gamma_s=0.0)
        theta_mm, _ = mixing_angles(p, 0.0)
        assert theta_mm == 0.0

    def test_reflection_phase_peaks(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=2.0, gamma_s=1e-9)
        w_star = np.sqrt(p.gamma_m**2 - p.gamma_ell**2) / 2.0
        for sign in (+1.0, -1.0):
            theta_mm, _ = mixing_angles(p, sign * w_star)
            assert abs(np.sin(theta_mm)) > 1.0 - 1e-8

    def test_theta_mm_slope_matches_finite_difference(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=2.0, gamma_s=1e-9)
        h = 1e-6
        for w in (0.3, 1.1, 4.0):
            fd = (mixing_angles(p, w + h)[0] - mixing_angles(p, w - h)[0]) / (2 * h)
            assert_allclose(theta_mm_slope(p, w), fd, rtol=1e-6)


class TestCavityChannel:
    def test_symplectic_rep_is_symplectic(self, rng):
        for _ in range(50):
            cavity_symplectic(random_params(rng), rng.uniform(-5, 5))  # validates

    def test_channel_matches_three_mode_reduction(self, rng):
        for _ in range(300):
            p = random_params(rng)
            w = rng.uniform(-6.0, 6.0)
            mu_s = rng.normal(size=2)
            channel = cavity_channel(p, w, mu_s)
            oracle = reduce_to_channel(
                cavity_symplectic(p, w),
                np.concatenate([mu_s, np.zeros(2)]),
                p.n_t * np.eye(4), [0])
            state = GaussianState(rng.normal(size=2), random_physical_cov(rng, 1))
            out = apply_channel(channel, state)
            ref = apply_channel(oracle, state)
            assert_allclose(out.mean, ref.mean, atol=1e-10)
            assert_allclose(out.cov, ref.cov, atol=1e-10)

    def test_critical_on_resonance_erases_input(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=1.0, gamma_s=0.0, n_t_bar=0.3)
        ch = cavity_channel(p, 0.0, (1.0, 0.0))
        assert np.abs(ch.scale).max() < 1e-15
        # Displacement lies along the input signal axis; the overall sign is
        # the principal-angle convention (chi_ms real negative on resonance).
        assert abs(ch.displacement[1]) < 1e-15
        assert_allclose(abs(ch.displacement[0]), np.sqrt(chi_ms_sq(p, 0.0)), rtol=1e-12)

    def test_zero_signal_mean_is_pure_loss_rotation(self, rng):
        p = random_params(rng)
        ch = cavity_channel(p, 0.9)
        assert_allclose(ch.displacement, np.zeros(2), atol=1e-15)
        t = chi_mm_sq(p, 0.9)
        assert_allclose(ch.scale @ ch.scale.T, t * np.eye(2), atol=1e-12)
        assert_allclose(ch.noise, p.n_t * (1 - t) * np.eye(2), rtol=1e-12)

    def test_overcoupled_transmission_value(self):
        p = CavityParams(gamma_ell=1.0, gamma_m=2.0, gamma_s=1e-12)
        assert_allclose(chi_mm_sq_expanded(p, 1.0), 5.0 / 13.0, rtol=1e-12)
        theta_mm, _ = mixing_angles(p, 1.0)
        assert_allclose(np.sin(theta_mm), 2.0 / np.sqrt((0.25 + 1) * (2.25 + 1)),
                        rtol=1e-9)

    def test_input_output_moments_closed_form(self, rng):
        # mean -> |chi_mm| O(t_mm) mean + |chi_ms| O(t_ms) mu_s,
        # cov -> |chi_mm|^2 O cov O^T + N_T (1 - |chi_mm|^2) I.
        p = random_params(rng)
        w = -1.7
        mu_s = np.array([0.8, -0.5])
        state = GaussianState([0.2, 0.1], np.diag([0.5, 2.0]))
        out = apply_channel(cavity_channel(p, w, mu_s), state)

        theta_mm, theta_ms = mixing_angles(p, w)
        def rot(t):
            return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        amp_mm, amp_ms = np.sqrt(chi_mm_sq(p, w)), np.sqrt(chi_ms_sq(p, w))
        mean = amp_mm * rot(theta_mm) @ state.mean + amp_ms * rot(theta_ms) @ mu_s
        cov = amp_mm**2 * rot(theta_mm) @ state.cov @ rot(theta_mm).T \
            + p.n_t * (1 - amp_mm**2) * np.eye(2)
        assert_allclose(out.mean, mean, atol=1e-12)
        assert_allclose(out.cov, cov, atol=1e-12)
