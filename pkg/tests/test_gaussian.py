import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cavityscan.gaussian import (GaussianChannel, GaussianState, SymplecticMap,
                                 apply_channel, apply_symplectic, beam_splitter,
                                 compose_channels, direct_sum, reduce_to_channel,
                                 rotation, single_mode_squeezer, sum_gate,
                                 symplectic_form, thermal_state, two_mode_squeezer,
                                 vacuum_state)

from conftest import min_physicality_eig, random_physical_cov, random_symplectic


def symplectic_defect(mat):
    n = mat.shape[0] // 2
    omega = symplectic_form(n)
    return np.abs(mat @ omega @ mat.T - omega).max()


class TestFactories:
    def test_rotation_zero_is_identity(self):
        assert_allclose(rotation(0.0).matrix, np.eye(2), atol=1e-15)

    @given(st.floats(-10.0, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_rotation_symplectic(self, theta):
        assert symplectic_defect(rotation(theta).matrix) < 1e-10

    @given(st.floats(1.0, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_squeezer_symplectic_and_action(self, gain):
        s = single_mode_squeezer(gain)
        assert symplectic_defect(s.matrix) < 1e-10
        out = apply_symplectic(s, vacuum_state(1))
        assert_allclose(np.diag(out.cov), [1.0 / gain, gain], rtol=1e-12)

    @given(st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_beam_splitter_symplectic(self, tau):
        assert symplectic_defect(beam_splitter(tau).matrix) < 1e-10

    def test_sum_gate_times_inverse_is_identity(self):
        s = sum_gate()
        assert np.abs(s.matrix @ s.inverse().matrix - np.eye(4)).max() < 1e-14

    def test_sum_gate_adds_q_onto_ancilla(self):
        vec = np.array([0.3, -0.2, 0.1, 0.5])
        out = sum_gate().matrix @ vec
        assert_allclose(out, [0.3, -0.2 - 0.5, 0.1 + 0.3, 0.5], atol=1e-15)

    def test_two_mode_squeezer_on_thermal_closed_form(self):
        r, n_t = 0.8, 1.7
        out = apply_symplectic(two_mode_squeezer(r), thermal_state(2, n_t))
        sz = np.diag([1.0, -1.0])
        expected = n_t * np.block([[np.cosh(2 * r) * np.eye(2), np.sinh(2 * r) * sz],
                                   [np.sinh(2 * r) * sz, np.cosh(2 * r) * np.eye(2)]])
        assert_allclose(out.cov, expected, rtol=1e-12)

    def test_out_of_range_parameters_rejected(self):
        with pytest.raises(ValueError):
            single_mode_squeezer(0.5)
        with pytest.raises(ValueError):
            beam_splitter(1.5)
        with pytest.raises(ValueError):
            two_mode_squeezer(-0.1)

    def test_non_symplectic_matrix_rejected(self):
        with pytest.raises(ValueError):
            SymplecticMap(np.diag([2.0, 2.0]))


class TestChannels:
    def test_identity_channel_returns_same_state(self, rng):
        state = GaussianState(rng.normal(size=2), random_physical_cov(rng, 1))
        ident = GaussianChannel(np.eye(2), np.zeros((2, 2)))
        out = apply_channel(ident, state)
        assert_allclose(out.mean, state.mean, atol=1e-15)
        assert_allclose(out.cov, state.cov, atol=1e-15)

    def test_full_loss_replaces_with_thermal_vacuum(self):
        squeezed = GaussianState([0.4, -0.1], np.diag([0.25, 4.0]))
        loss = GaussianChannel(np.zeros((2, 2)), 1.0 * np.eye(2))
        out = apply_channel(loss, squeezed)
        assert_allclose(out.mean, [0.0, 0.0], atol=1e-15)
        assert_allclose(out.cov, np.eye(2), atol=1e-15)

    def test_half_loss_on_squeezed_state(self):
        # Oracle: mean -> sqrt(eta) mean, cov -> eta cov + (1 - eta) N_T I,
        # evaluated by hand for eta = 1/2, N_T = 1 on diag(1/4, 4).
        eta, n_t = 0.5, 1.0
        expected = eta * np.diag([0.25, 4.0]) + (1 - eta) * n_t * np.eye(2)
        assert_allclose(np.diag(expected), [0.625, 2.5], rtol=0, atol=1e-15)
        channel = GaussianChannel(np.sqrt(eta) * np.eye(2), n_t * (1 - eta) * np.eye(2))
        out = apply_channel(channel, GaussianState([0.0, 0.0], np.diag([0.25, 4.0])))
        assert_allclose(out.cov, expected, rtol=1e-14)

    def test_dimension_mismatch_rejected(self):
        channel = GaussianChannel(np.eye(2), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            apply_channel(channel, vacuum_state(2))

    def test_non_cp_channel_rejected(self):
        # Pure attenuation with no added noise violates complete positivity.
        with pytest.raises(ValueError):
            GaussianChannel(0.5 * np.eye(2), np.zeros((2, 2)))

    def test_physicality_preserved_on_random_channel_batch(self, rng):
        n = 10_000
        theta = rng.uniform(-np.pi, np.pi, size=(2, n))
        r = rng.uniform(0.0, 1.2, size=n)
        nbar = rng.uniform(1.0, 3.0, size=n)

        def rot(t):
            return np.moveaxis(np.array([[np.cos(t), -np.sin(t)],
                                         [np.sin(t), np.cos(t)]]), -1, 0)

        sq = np.zeros((n, 2, 2))
        sq[:, 0, 0] = np.exp(-r)
        sq[:, 1, 1] = np.exp(r)
        states = rot(theta[0]) @ (nbar[:, None, None] * sq**2) @ rot(theta[0]).transpose(0, 2, 1)

        scale = rot(theta[1]) @ (rng.uniform(0.2, 1.5, size=n)[:, None, None] * sq)
        det = np.linalg.det(scale)
        noise = (np.abs(1.0 - det) * (1.0 + rng.uniform(0.0, 2.0, size=n)))[:, None, None] \
            * np.eye(2)
        out = scale @ states @ scale.transpose(0, 2, 1) + noise

        omega = symplectic_form(1)
        eigs = np.linalg.eigvalsh(out + 1j * omega)
        assert eigs.min() >= -1e-8

    def test_compose_channels_matches_sequential(self, rng):
        first = GaussianChannel(0.7 * np.eye(2), 0.6 * np.eye(2), [0.1, -0.3])
        second = GaussianChannel(rotation(0.4).matrix, 0.2 * np.eye(2), [0.5, 0.2])
        state = GaussianState(rng.normal(size=2), random_physical_cov(rng, 1))
        via_compose = apply_channel(compose_channels(second, first), state)
        via_steps = apply_channel(second, apply_channel(first, state))
        assert_allclose(via_compose.mean, via_steps.mean, atol=1e-14)
        assert_allclose(via_compose.cov, via_steps.cov, atol=1e-14)


def joint_state(system, env_mean, env_cov, system_modes, n_total):
    """Embed a system state and environment moments into the full mode set."""
    mean = np.zeros(2 * n_total)
    cov = np.zeros((2 * n_total, 2 * n_total))
    sys_q = np.concatenate([[2 * m, 2 * m + 1] for m in system_modes]).astype(int)
    env_modes = [m for m in range(n_total) if m not in system_modes]
    env_q = np.concatenate([[2 * m, 2 * m + 1] for m in env_modes]).astype(int)
    mean[sys_q] = system.mean
    mean[env_q] = env_mean
    cov[np.ix_(sys_q, sys_q)] = system.cov
    cov[np.ix_(env_q, env_q)] = env_cov
    return GaussianState(mean, cov), sys_q


class TestReduceToChannel:
    def test_identity_symplectic_gives_identity_channel(self):
        s = SymplecticMap(np.eye(4))
        ch = reduce_to_channel(s, np.zeros(2), np.eye(2), [0])
        assert_allclose(ch.scale, np.eye(2), atol=1e-15)
        assert_allclose(ch.noise, np.zeros((2, 2)), atol=1e-15)
        assert_allclose(ch.displacement, np.zeros(2), atol=1e-15)

    def test_balanced_splitter_gives_half_loss(self):
        ch = reduce_to_channel(beam_splitter(0.5), np.zeros(2), np.eye(2), [0])
        assert_allclose(ch.scale, np.eye(2) / np.sqrt(2), rtol=1e-14)
        assert_allclose(ch.noise, np.eye(2) - ch.scale @ ch.scale.T, rtol=1e-14)

    def test_marginal_equivalence_random_draws(self, rng):
        for _ in range(1000):
            n = int(rng.integers(2, 4))
            n_sys = 1 if n == 2 else int(rng.integers(1, 3))
            modes = sorted(rng.choice(n, size=n_sys, replace=False).tolist())
            s = random_symplectic(rng, n)
            n_env = n - n_sys
            env_mean = rng.normal(size=2 * n_env)
            env_cov = random_physical_cov(rng, n_env)
            system = GaussianState(rng.normal(size=2 * n_sys),
                                   random_physical_cov(rng, n_sys))

            channel = reduce_to_channel(s, env_mean, env_cov, modes)
            reduced = apply_channel(channel, system)

            joint, sys_q = joint_state(system, env_mean, env_cov, modes, n)
            evolved = apply_symplectic(s, joint)
            assert_allclose(reduced.mean, evolved.mean[sys_q], atol=1e-10)
            assert_allclose(reduced.cov, evolved.cov[np.ix_(sys_q, sys_q)], atol=1e-10)

    def test_composition_on_beam_splitter_chain(self, rng):
        # Mode 0 is the system; modes 1 and 2 are independent environments hit
        # by successive two-mode splitters, so the reduced channels compose.
        tau1, tau2 = 0.7, 0.4
        s1 = direct_sum(beam_splitter(tau1), SymplecticMap(np.eye(2)))
        mix = np.eye(6)
        mix[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])] = beam_splitter(tau2).matrix
        s2 = SymplecticMap(mix)

        nbar1, nbar2 = 1.8, 1.2
        ch1 = reduce_to_channel(beam_splitter(tau1), np.zeros(2), nbar1 * np.eye(2), [0])
        ch2 = reduce_to_channel(beam_splitter(tau2), np.zeros(2), nbar2 * np.eye(2), [0])
        combined = reduce_to_channel(
            s2 @ s1, np.zeros(4),
            np.diag([nbar1, nbar1, nbar2, nbar2]).astype(float), [0])

        state = GaussianState(rng.normal(size=2), random_physical_cov(rng, 1))
        direct = apply_channel(combined, state)
        sequential = apply_channel(ch2, apply_channel(ch1, state))
        assert_allclose(direct.mean, sequential.mean, atol=1e-12)
        assert_allclose(direct.cov, sequential.cov, atol=1e-12)

    def test_unphysical_environment_rejected(self):
        with pytest.raises(ValueError):
            reduce_to_channel(beam_splitter(0.5), np.zeros(2), 0.1 * np.eye(2), [0])

    def test_empty_system_rejected(self):
        with pytest.raises(ValueError):
            reduce_to_channel(beam_splitter(0.5), np.zeros(2), np.eye(2), [])


class TestStateValidation:
    def test_asymmetric_cov_rejected(self):
        with pytest.raises(ValueError):
            GaussianState([0.0, 0.0], np.array([[1.0, 0.2], [0.1, 1.0]]))

    def test_physicality_flag(self):
        assert vacuum_state(2).is_physical()
        assert not GaussianState([0.0, 0.0], 0.5 * np.eye(2)).is_physical()

    def test_random_covs_are_physical(self, rng):
        for _ in range(50):
            cov = random_physical_cov(rng, 2)
            assert min_physicality_eig(cov) >= -1e-9
