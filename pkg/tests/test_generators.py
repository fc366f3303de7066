"""Generator schemes: defining formulas, reductions, and family identities."""

import numpy as np
import pytest

from dissflow.generators import (GeneratorScheme, eta, eta_gpc, eta_hpc,
                                 eta_ipc, eta_pc, eta_powerlaw, eta_ppc,
                                 eta_r1, eta_r2, eta_r3)


def random_complex(rng, n, diag_spread=2.0):
    m = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    # spread the diagonal so no pair is accidentally degenerate
    m[np.diag_indices(n)] += diag_spread * (np.arange(n) + 1j * rng.uniform(-1, 1, n))
    return m


def random_hermitian(rng, n):
    m = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    return 0.5 * (m + m.conj().T)


def random_antihermitian(rng, n):
    return 1j * random_hermitian(rng, n)


class TestPc:
    def test_diagonal_gives_zero(self):
        assert np.all(eta_pc(np.diag([1.0, 2.0, 3.0])) == 0)

    def test_sign_pattern(self):
        m = np.array([[0, 1], [1, 0]], dtype=complex)
        np.testing.assert_allclose(eta_pc(m), [[0, -1], [1, 0]], atol=1e-15)

    def test_sorted_variant_matches_on_ascending_diagonal(self):
        rng = np.random.default_rng(0)
        m = random_hermitian(rng, 3)
        m[np.diag_indices(3)] = [0.0, 1.0, 2.0]
        np.testing.assert_array_equal(eta_pc(m), eta_pc(m, sorted_variant=True))

    def test_sorted_variant_flips_on_descending_diagonal(self):
        m = np.array([[2.0, 1.0], [1.0, 0.0]], dtype=complex)
        np.testing.assert_allclose(eta_pc(m, sorted_variant=True),
                                   -eta_pc(m), atol=1e-15)


class TestIpc:
    def test_antihermitian_example(self):
        a = np.array([[0, 1j], [1j, 0]])
        np.testing.assert_allclose(eta_ipc(a), [[0, 1], [-1, 0]], atol=1e-15)

    def test_diagonal_gives_zero(self):
        assert np.all(eta_ipc(np.diag([1j, 2j])) == 0)

    def test_relation_to_pc_of_rotated_matrix(self):
        # the entrywise definition eta_nj = i sign(n-j) a_nj means the ipc
        # generator of A equals the pc generator of the Hermitian matrix iA
        rng = np.random.default_rng(1)
        a = random_antihermitian(rng, 5)
        np.testing.assert_allclose(eta_ipc(a), eta_pc(1j * a), atol=1e-14)


class TestGpc:
    def test_reduces_to_pc_on_hermitian(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            h = random_hermitian(rng, 6)
            np.testing.assert_allclose(eta_gpc(h),
                                       eta_pc(h, sorted_variant=True), atol=1e-14)

    def test_reduces_to_pc_index_variant_when_sorted(self):
        rng = np.random.default_rng(3)
        h = random_hermitian(rng, 5)
        h[np.diag_indices(5)] = np.arange(5.0)
        np.testing.assert_allclose(eta_gpc(h), eta_pc(h), atol=1e-14)

    def test_reduces_to_ipc_on_antihermitian(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = random_antihermitian(rng, 6)
            np.testing.assert_allclose(eta_gpc(a),
                                       eta_ipc(a, sorted_variant=True), atol=1e-14)

    def test_degenerate_pair_zeroed(self):
        m = np.array([[1.0, 0.5, 0.2],
                      [0.3, 1.0, 0.1],
                      [0.7, 0.4, 2.0]], dtype=complex)
        out = eta_gpc(m)
        assert out[0, 1] == 0 and out[1, 0] == 0
        assert out[0, 2] != 0

    def test_unit_modulus_prefactor(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m = random_complex(rng, 5)
            out = eta_gpc(m)
            off = ~np.eye(5, dtype=bool)
            np.testing.assert_allclose(np.abs(out[off]), np.abs(m[off]), atol=1e-14)


class TestRFamily:
    def test_r1_is_commutator(self):
        rng = np.random.default_rng(6)
        m = random_complex(rng, 4)
        v = m - np.diag(np.diag(m))
        expected = m.conj().T @ v - v @ m.conj().T
        np.testing.assert_allclose(eta_r1(m), expected, atol=1e-14)

    def test_r1_on_hermitian_equals_wegner_style(self):
        rng = np.random.default_rng(7)
        h = random_hermitian(rng, 5)
        v = h - np.diag(np.diag(h))
        np.testing.assert_allclose(eta_r1(h), h @ v - v @ h, atol=1e-13)

    def test_r1_keeps_its_diagonal(self):
        # the commutator definition produces a real working diagonal for
        # non-normal matrices; it must not be discarded
        m = np.array([[1 + 0.5j, 1.0], [-0.25, 1 - 0.5j]])
        out = eta_r1(m)
        assert abs(out[0, 0]) > 0.1

    def test_r2_entrywise_formula(self):
        m = np.array([[1j, 1.0], [0.3, -1j]])
        out = eta_r2(m)
        # m11 - m22 = 2i so eta_12 = conj(2i) * 1 = -2i
        assert out[0, 1] == pytest.approx(-2j, abs=1e-15)
        assert out[1, 0] == pytest.approx(2j * 0.3, abs=1e-15)

    def test_r3_division(self):
        m = np.array([[2.0, 1.0], [4.0, 0.0]], dtype=complex)
        out = eta_r3(m)
        assert out[0, 1] == pytest.approx(0.5, abs=1e-15)
        assert out[1, 0] == pytest.approx(-2.0, abs=1e-15)

    def test_r3_degeneracy_guard(self):
        m = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-12]], dtype=complex)
        out = eta_r3(m, cutoff=1e-10)
        assert np.all(out == 0)

    @pytest.mark.parametrize("fn", [eta_r2, eta_r3])
    def test_diagonal_input_gives_zero(self, fn):
        assert np.all(fn(np.diag([1.0, 2.0, 5.0])) == 0)


class TestPowerlawFamily:
    def test_family_coherence(self):
        # eta^(r) at r in {-1, 0, 1} vs the named generators, 500 matrices
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(500):
            n = int(rng.integers(2, 7))
            m = random_complex(rng, n)
            for r, ref in ((1.0, eta_r2(m)), (0.0, eta_gpc(m)), (-1.0, eta_r3(m))):
                dev = np.abs(eta_powerlaw(m, r) - ref).max()
                worst = max(worst, dev)
        assert worst <= 1e-13

    def test_fractional_exponent_interpolates_magnitude(self):
        m = np.array([[0.0, 1.0], [1.0, 3.0]], dtype=complex)
        out = eta_powerlaw(m, 0.5)
        assert abs(out[0, 1]) == pytest.approx(np.sqrt(3.0), rel=1e-12)

    def test_rejects_nonfinite_exponent(self):
        with pytest.raises(ValueError):
            eta_powerlaw(np.eye(2, dtype=complex), np.inf)


class TestPpc:
    def test_theta_zero_is_pc(self):
        rng = np.random.default_rng(9)
        m = random_complex(rng, 4)
        np.testing.assert_allclose(eta_ppc(m, 0.0), eta_pc(m), atol=1e-15)

    def test_theta_half_pi_is_ipc(self):
        rng = np.random.default_rng(10)
        m = random_complex(rng, 4)
        np.testing.assert_allclose(eta_ppc(m, np.pi / 2), eta_ipc(m), atol=1e-14)

    def test_theta_quarter_pi_phase(self):
        rng = np.random.default_rng(11)
        m = random_complex(rng, 3)
        np.testing.assert_allclose(eta_ppc(m, np.pi / 4),
                                   (1 + 1j) / np.sqrt(2) * eta_pc(m), atol=1e-14)

    def test_theta_out_of_range(self):
        with pytest.raises(ValueError):
            eta_ppc(np.eye(2, dtype=complex), -0.1)
        with pytest.raises(ValueError):
            GeneratorScheme("ppc", theta=2.0)


class TestHpc:
    def test_diagonal_gives_zero(self):
        assert np.all(eta_hpc(np.diag([1.0, 2.0])) == 0)

    def test_nilpotent_example(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        assert np.all(eta_hpc(m) == 0)

    def test_orthogonal_columns_are_fixed_points(self):
        # columns orthogonal but not normalized: off-diagonal of M^dag M is 0
        m = np.array([[3.0, 0.0], [0.0, 0.5j]], dtype=complex) @ \
            np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        m = m.T  # columns orthogonal
        out = eta_hpc(m)
        np.testing.assert_allclose(out, 0, atol=1e-14)

    def test_matches_pc_of_gram_matrix(self):
        rng = np.random.default_rng(12)
        m = random_complex(rng, 5)
        np.testing.assert_allclose(eta_hpc(m), eta_pc(m.conj().T @ m), atol=1e-13)


class TestScheme:
    def test_dispatch_matches_functions(self):
        rng = np.random.default_rng(13)
        m = random_complex(rng, 5)
        pairs = [
            ("pc", eta_pc(m)),
            ("ipc", eta_ipc(m)),
            ("gpc", eta_gpc(m)),
            ("r1", eta_r1(m)),
            ("r2", eta_r2(m)),
            ("r3", eta_r3(m)),
            ("hpc", eta_hpc(m)),
        ]
        for kind, expected in pairs:
            np.testing.assert_array_equal(eta(m, GeneratorScheme(kind)), expected)
        np.testing.assert_array_equal(
            eta(m, GeneratorScheme("powerlaw", r=0.5)), eta_powerlaw(m, 0.5))
        np.testing.assert_array_equal(
            eta(m, GeneratorScheme("ppc", theta=0.3)), eta_ppc(m, 0.3))

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            GeneratorScheme("wegner")

    def test_zero_diagonal_for_entrywise_schemes(self):
        rng = np.random.default_rng(14)
        m = random_complex(rng, 6)
        for kind in ("pc", "pc_sorted", "ipc", "ipc_sorted", "gpc", "r2", "r3",
                     "hpc", "powerlaw"):
            out = eta(m, GeneratorScheme(kind, r=0.5))
            assert np.all(np.diag(out) == 0), kind

    def test_labels(self):
        assert GeneratorScheme("gpc").label == "gpc"
        assert GeneratorScheme("powerlaw", r=-0.5).label == "powerlaw(-0.5)"
