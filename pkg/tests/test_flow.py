"""Flow engine: right-hand side, integration, invariants, stopping."""

import numpy as np
import pytest

import dissflow.flow as flow_mod
from dissflow.flow import (DivergenceError, FlowConfig, StiffnessError,
                           TRAJECTORY_CSV_HEADER, alternating_pc_ipc_flow,
                           flow_rhs, integrate_flow, trajectory_to_csv)
from dissflow.generators import GeneratorScheme
from dissflow.linalg import BandMask, eigenvalues, rod, spectral_distance
from dissflow.models import SingleModeSpec, build_single_mode


GPC = GeneratorScheme("gpc")


def single_mode():
    return build_single_mode(SingleModeSpec(1.0, 0.3, 0.1))


def random_crossover_like(rng, n, alpha=0.5):
    r = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    return r + (1 - 2 * alpha) * r.conj().T


class TestFlowRhs:
    def test_diagonal_fixed_point(self):
        m = np.diag([1.0 + 1j, 2.0, -0.5j])
        for kind in ("pc", "ipc", "gpc", "r1", "r2", "r3", "hpc"):
            np.testing.assert_allclose(flow_rhs(m, GeneratorScheme(kind)), 0,
                                       atol=1e-15)

    def test_single_mode_gpc_display(self):
        # alpha = -0.1, mu1 = 0.3, mu2 = 0.1, sign(alpha) = -1:
        # [[2i mu1 mu2 s, -2 mu2 |a|], [2 mu1 |a|, -2i mu1 mu2 s]]
        out = flow_rhs(single_mode(), GPC)
        np.testing.assert_allclose(
            out, [[-0.06j, -0.02], [0.06, 0.06j]], atol=1e-15)

    def test_single_mode_r1_equations(self):
        # d alpha = 4 a mu1 mu2, d mu1 = -2 mu1 (2a^2 + mu1^2 - mu2^2),
        # d mu2 = -2 mu2 (2a^2 - mu1^2 + mu2^2); requires the commutator's
        # diagonal part of eta_r1
        out = flow_rhs(single_mode(), GeneratorScheme("r1"))
        d_alpha = 4 * (-0.1) * 0.3 * 0.1
        d_mu1 = -2 * 0.3 * (2 * 0.01 + 0.09 - 0.01)
        d_mu2 = -2 * 0.1 * (2 * 0.01 - 0.09 + 0.01)
        np.testing.assert_allclose(
            out, [[1j * d_alpha, d_mu2], [-d_mu1, -1j * d_alpha]], atol=1e-15)

    def test_mask_applied_to_derivative(self):
        rng = np.random.default_rng(0)
        m = random_crossover_like(rng, 6)
        out = flow_rhs(m, GPC, truncation=BandMask(1, 6))
        idx = np.arange(6)
        far = np.abs(idx[:, None] - idx[None, :]) > 1
        assert np.all(out[far] == 0)
        assert np.any(out[~far] != 0)

    def test_complex_sorted_band_diagonal_out_of_band_zero(self):
        # diagonal on one ray through the origin and sorted: the derivative
        # acquires no out-of-band entries even without masking
        rng = np.random.default_rng(1)
        c = np.exp(0.7j)
        n = 10
        for order in (1, 2):
            m = np.zeros((n, n), dtype=complex)
            m[np.diag_indices(n)] = c * np.cumsum(rng.uniform(0.5, 1.0, n))
            idx = np.arange(n)
            band = (np.abs(idx[:, None] - idx[None, :]) <= order) & \
                   (idx[:, None] != idx[None, :])
            vals = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
            m[band] = vals[band]
            out = flow_rhs(m, GPC)
            far = np.abs(idx[:, None] - idx[None, :]) > order
            assert np.abs(out[far]).max() <= 1e-13 * np.abs(m).max() ** 2

    def test_counterexamples_leak_out_of_band(self):
        m1 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 1j]], dtype=complex)
        m2 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=complex)
        for m in (m1, m2):
            out = flow_rhs(m, GPC)
            assert max(abs(out[0, 2]), abs(out[2, 0])) > 0.5


class TestIntegration:
    def test_diagonal_converges_immediately(self):
        traj = integrate_flow(np.diag([1.0, 2.0 + 1j]), [], FlowConfig(scheme=GPC))
        assert traj.converged and traj.steps_taken == 0
        assert len(traj.samples) == 1 and traj.samples[0].l == 0.0

    @pytest.mark.parametrize("kind", ["gpc", "r1", "r2", "r3"])
    def test_single_mode_diagonalizes(self, kind):
        m = single_mode()
        traj = integrate_flow(m, [], FlowConfig(scheme=GeneratorScheme(kind)))
        assert traj.converged
        assert traj.samples[-1].rod <= 1e-8
        got = np.sort_complex(np.diag(traj.final_matrix))
        np.testing.assert_allclose(got, [1 - 0.2j, 1 + 0.2j], atol=1e-6)

    def test_gamma2_zero_gpc_matches_closed_form_along_trajectory(self):
        gamma1 = 1.0
        m = build_single_mode(SingleModeSpec(0.5, gamma1, 0.0))
        traj = integrate_flow(m, [], FlowConfig(scheme=GPC, record_matrices=True))
        assert traj.converged
        for s in traj.samples:
            mu1 = -s.matrix[1, 0].real
            assert mu1 == pytest.approx(gamma1 * np.exp(-gamma1 * s.l), abs=1e-6)

    def test_trace_invariants_and_spectrum(self):
        rng = np.random.default_rng(3)
        m = random_crossover_like(rng, 12)
        traj = integrate_flow(m, [], FlowConfig(scheme=GPC))
        assert traj.converged
        tr0, tr2_0 = traj.samples[0].trace, traj.samples[0].trace_sq
        for s in traj.samples:
            assert abs(s.trace - tr0) <= 1e-8 * (1 + abs(tr0))
            assert abs(s.trace_sq - tr2_0) <= 1e-8 * (1 + abs(tr2_0))
        assert spectral_distance(np.diag(traj.final_matrix),
                                 eigenvalues(m)) <= 1e-6

    def test_strictly_increasing_l(self):
        rng = np.random.default_rng(4)
        m = random_crossover_like(rng, 8)
        traj = integrate_flow(m, [], FlowConfig(scheme=GPC, record_stride=3))
        l = traj.l_values
        assert np.all(np.diff(l) > 0)

    def test_observable_coflow_reproduces_matrix(self):
        rng = np.random.default_rng(5)
        m = random_crossover_like(rng, 6)
        traj = integrate_flow(m, [m], FlowConfig(scheme=GPC))
        np.testing.assert_allclose(traj.final_observables[0],
                                   traj.final_matrix, atol=1e-6)

    @pytest.mark.parametrize("r", [-1.0, 0.0, 1.0])
    def test_asymptotic_decay_exponent(self, r):
        # late flow: ROD ~ exp(-|dE|^(r+1) l) with dE the final diagonal gap
        m = np.array([[0.2 + 0.1j, 0.15], [0.1, 1.6 - 0.5j]])
        gap = abs(np.subtract(*eigenvalues(m)))
        expected = gap ** (r + 1.0)
        scheme = GeneratorScheme("powerlaw", r=r)
        traj = integrate_flow(m, [], FlowConfig(scheme=scheme, record_stride=1))
        rods, ls = traj.rod_values, traj.l_values
        window = (rods < 1e-4) & (rods > 1e-7)
        assert window.sum() >= 3
        slope = np.polyfit(ls[window], np.log(rods[window]), 1)[0]
        assert -slope == pytest.approx(expected, rel=0.05)

    def test_band_preservation_along_flow(self):
        # ray-Hermitian complex-sorted band matrices stay band-diagonal as
        # long as the diagonal stays ordered (here: all the way to the end)
        rng = np.random.default_rng(6)
        n, order = 12, 2
        c = np.exp(1j * rng.uniform(0, np.pi / 2))
        h = np.zeros((n, n), dtype=complex)
        h[np.diag_indices(n)] = np.cumsum(rng.uniform(0.5, 1.5, n))
        idx = np.arange(n)
        band = (np.abs(idx[:, None] - idx[None, :]) <= order) & \
               (idx[:, None] != idx[None, :])
        v = rng.uniform(-0.2, 0.2, (n, n)) + 1j * rng.uniform(-0.2, 0.2, (n, n))
        v = 0.5 * (v + v.conj().T)
        h[band] = v[band]
        m = c * h
        # keep h within the explicit-stability region of the fastest mode so
        # rounding noise is not amplified to the tolerance floor
        diag = m.diagonal()
        max_rate = np.abs(diag[:, None] - diag[None, :]).max()
        traj = integrate_flow(m, [], FlowConfig(scheme=GPC, record_matrices=True,
                                                record_stride=10,
                                                max_step=2.5 / max_rate))
        assert traj.converged
        far = np.abs(idx[:, None] - idx[None, :]) > order
        for s in traj.samples:
            diag = s.matrix.diagonal() / c
            assert np.all(np.diff(diag.real) > 0)  # ordering persisted
            assert np.abs(s.matrix[far]).max() <= 1e-12

    def test_truncated_state_never_leaves_band(self):
        rng = np.random.default_rng(7)
        m = random_crossover_like(rng, 8)
        cfg = FlowConfig(scheme=GPC, truncation=BandMask(1, 8),
                         record_matrices=True, l_max_cap=50.0, record_stride=5)
        traj = integrate_flow(m, [], cfg)
        idx = np.arange(8)
        far = np.abs(idx[:, None] - idx[None, :]) > 1
        for s in traj.samples:
            assert np.all(s.matrix[far] == 0)

    def test_nonconvergence_reported_at_cap(self):
        rng = np.random.default_rng(8)
        m = random_crossover_like(rng, 8)
        traj = integrate_flow(m, [], FlowConfig(scheme=GPC, l_max_cap=1e-3))
        assert not traj.converged
        assert traj.samples[-1].l <= 1e-3 + 1e-12

    def test_observable_dimension_mismatch(self):
        with pytest.raises(ValueError):
            integrate_flow(np.eye(3, dtype=complex), [np.eye(2, dtype=complex)],
                           FlowConfig(scheme=GPC))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FlowConfig(scheme=GPC, abs_tol=0.0)
        with pytest.raises(ValueError):
            FlowConfig(scheme=GPC, rod_stop=-1.0)
        with pytest.raises(ValueError):
            FlowConfig(scheme=GPC, record_stride=0)


class TestFailureModes:
    def test_divergence_error_carries_trajectory(self, monkeypatch):
        def bad_eta(m, scheme):
            return np.full_like(m, np.nan)

        monkeypatch.setattr(flow_mod, "eta", bad_eta)
        m = single_mode()
        with pytest.raises(DivergenceError) as info:
            integrate_flow(m, [], FlowConfig(scheme=GPC))
        assert info.value.trajectory.samples

    def test_stiffness_error_on_exploding_rhs(self, monkeypatch):
        # a derivative too large for any representable step starves the
        # controller until the step size underflows
        def huge_eta(m, scheme):
            return np.full_like(m, 1e24)

        monkeypatch.setattr(flow_mod, "eta", huge_eta)
        m = single_mode()
        with pytest.raises(StiffnessError) as info:
            integrate_flow(m, [], FlowConfig(scheme=GPC))
        assert not info.value.trajectory.converged


class TestAlternatingFlow:
    def test_hermitian_converges_in_pc_phase(self):
        rng = np.random.default_rng(10)
        h = random_crossover_like(rng, 6, alpha=0.0)
        traj = alternating_pc_ipc_flow(h, FlowConfig(scheme=GPC))
        assert traj.converged
        assert rod(traj.final_matrix) <= 1e-8

    def test_antihermitian_converges_in_ipc_phase(self):
        rng = np.random.default_rng(11)
        a = random_crossover_like(rng, 6, alpha=1.0)
        traj = alternating_pc_ipc_flow(a, FlowConfig(scheme=GPC))
        assert traj.converged

    def test_mixed_matrix_does_not_converge(self):
        rng = np.random.default_rng(12)
        m = random_crossover_like(rng, 8, alpha=0.5)
        cfg = FlowConfig(scheme=GPC, l_max_cap=50.0)
        traj = alternating_pc_ipc_flow(m, cfg)
        assert not traj.converged
        assert traj.samples[-1].rod > 1e-8
        assert traj.phase_boundaries and np.all(np.diff(traj.l_values) > 0)


class TestCsvExport:
    def test_header_and_shape(self, tmp_path):
        traj = integrate_flow(single_mode(), [], FlowConfig(scheme=GPC))
        path = tmp_path / "traj.csv"
        trajectory_to_csv(traj, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == TRAJECTORY_CSV_HEADER
        assert len(lines) == len(traj.samples) + 1
        first = lines[1].split(",")
        assert len(first) == 7 and float(first[0]) == 0.0
