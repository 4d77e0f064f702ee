import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import KET0, KET1, PLUS
from revmeas.core import (
    BipartiteState,
    ProbabilityDistribution,
    bell_state,
    fidelity,
    make_density,
    maximally_mixed,
    partial_trace,
    pure_state,
    random_state,
    spectral_decompose,
    tensor_product,
)
from revmeas.errors import BadDistribution, BadRank, DimensionMismatch, NotHermitian, NotPositive, TraceNotOne


def assert_valid_density(rho, tol=1e-10):
    m = rho.matrix
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    assert np.linalg.eigvalsh(m)[0] >= -tol
    assert abs(np.trace(m).real - 1) <= tol


class TestMakeDensity:
    def test_maximally_mixed_accepted(self):
        rho = make_density(np.eye(2) / 2)
        assert rho.dim == 2
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2)

    def test_diagonal_eigenvalues(self):
        rho = make_density([[0.75, 0], [0, 0.25]])
        np.testing.assert_allclose(sorted(rho.eigenvalues()), [0.25, 0.75], atol=1e-15)

    def test_trace_not_one(self):
        with pytest.raises(TraceNotOne, match="1.1"):
            make_density([[1, 0], [0, 0.1]])

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            make_density([[0.5, 0.1], [0.2, 0.5]])

    def test_not_positive(self):
        with pytest.raises(NotPositive):
            make_density([[1.5, 0], [0, -0.5]])

    def test_non_square(self):
        with pytest.raises(NotHermitian):
            make_density(np.ones((2, 3)) / 4)

    def test_small_negative_tail_is_clipped(self):
        rho = make_density(np.diag([1 + 5e-11, -5e-11]))
        assert rho.eigenvalues().min() == 0.0
        assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-15
        assert abs(np.trace(rho.matrix).real - 1) < 1e-15

    def test_immutable(self):
        rho = maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1


class TestSpectralDecompose:
    def test_diagonal(self):
        dec = spectral_decompose(np.diag([0.75, 0.25]))
        order = np.argsort(dec.eigenvalues)[::-1]
        np.testing.assert_allclose(dec.eigenvalues[order], [0.75, 0.25])
        np.testing.assert_allclose(dec.projectors[order[0]], np.diag([1, 0]), atol=1e-12)
        np.testing.assert_allclose(dec.projectors[order[1]], np.diag([0, 1]), atol=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_identity_single_group(self, d):
        dec = spectral_decompose(np.eye(d))
        assert len(dec) == 1
        np.testing.assert_allclose(dec.eigenvalues, [1.0])
        np.testing.assert_allclose(dec.projectors[0], np.eye(d), atol=1e-12)

    def test_pauli_x(self):
        dec = spectral_decompose([[0, 1], [1, 0]])
        vals = dict(zip(np.round(dec.eigenvalues).astype(int), dec.projectors))
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        np.testing.assert_allclose(vals[1], np.outer(plus, plus), atol=1e-12)
        np.testing.assert_allclose(vals[-1], np.outer(minus, minus), atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            spectral_decompose([[0, 1], [0, 0]])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6))
    def test_projector_invariants(self, seed, d):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        op = g + g.conj().T
        dec = spectral_decompose(op)
        np.testing.assert_allclose(dec.reconstruct(), op, atol=1e-10)
        np.testing.assert_allclose(sum(dec.projectors), np.eye(d), atol=1e-10)
        for i, p in enumerate(dec.projectors):
            np.testing.assert_allclose(p @ p, p, atol=1e-10)
            for q in dec.projectors[i + 1:]:
                np.testing.assert_allclose(p @ q, 0, atol=1e-10)

    def test_degenerate_groups(self):
        u = np.linalg.qr(np.random.default_rng(3).standard_normal((4, 4)))[0]
        op = u @ np.diag([0.2, 0.2, 0.2, 0.4]) @ u.T
        dec = spectral_decompose(op)
        assert len(dec) == 2
        ranks = sorted(round(np.trace(p).real) for p in dec.projectors)
        assert ranks == [1, 3]


class TestTensorAndPartialTrace:
    def test_maximally_mixed_product(self):
        s = tensor_product(maximally_mixed(2), maximally_mixed(2))
        assert (s.dim_a, s.dim_b) == (2, 2)
        np.testing.assert_allclose(s.matrix, np.eye(4) / 4)

    def test_basis_product(self):
        s = tensor_product(pure_state(KET0), pure_state(KET1))
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        np.testing.assert_allclose(s.matrix, expected)

    def test_kronecker_arithmetic(self):
        s = tensor_product(make_density(np.diag([0.75, 0.25])), maximally_mixed(2))
        np.testing.assert_allclose(s.matrix, np.diag([0.375, 0.375, 0.125, 0.125]))

    def test_bell_reduction(self):
        np.testing.assert_allclose(partial_trace(bell_state(), "B").matrix, np.eye(2) / 2, atol=1e-15)
        np.testing.assert_allclose(partial_trace(bell_state(), "A").matrix, np.eye(2) / 2, atol=1e-15)

    def test_basis_reduction(self):
        s = tensor_product(pure_state(KET0), pure_state(KET1))
        np.testing.assert_allclose(partial_trace(s, "B").matrix, np.diag([0, 1]), atol=1e-15)
        np.testing.assert_allclose(partial_trace(s, "A").matrix, np.diag([1, 0]), atol=1e-15)

    def test_ordering_convention(self):
        # A is the slow index: |a b> sits at a * d_B + b
        s = tensor_product(pure_state([0, 0, 1]), pure_state([0, 1]))
        assert s.matrix[2 * 2 + 1, 2 * 2 + 1] == 1

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), da=st.integers(1, 4), db=st.integers(1, 4))
    def test_product_factorizes(self, seed, da, db):
        sigma = random_state(da, da, [seed, 0])
        tau = random_state(db, db, [seed, 1])
        s = tensor_product(sigma, tau)
        np.testing.assert_allclose(partial_trace(s, "A").matrix, sigma.matrix, atol=1e-10)
        np.testing.assert_allclose(partial_trace(s, "B").matrix, tau.matrix, atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), da=st.integers(1, 4), db=st.integers(1, 4))
    def test_trace_preserved(self, seed, da, db):
        s = BipartiteState(random_state(da * db, da * db, seed), da, db)
        for keep in "AB":
            reduced = partial_trace(s, keep)
            assert abs(np.trace(reduced.matrix) - 1) <= 1e-10
            assert_valid_density(reduced)

    def test_bad_dims(self):
        with pytest.raises(DimensionMismatch):
            BipartiteState(maximally_mixed(4), 3, 2)

    def test_bad_selector(self):
        with pytest.raises(ValueError):
            partial_trace(bell_state(), "C")


class TestRandomState:
    def test_rank_one_is_pure(self):
        from revmeas.entropy import von_neumann_entropy

        assert von_neumann_entropy(random_state(2, 1, 5)) == pytest.approx(0, abs=1e-10)

    def test_deterministic(self):
        np.testing.assert_array_equal(random_state(2, 2, 7).matrix, random_state(2, 2, 7).matrix)

    def test_full_rank(self):
        assert np.linalg.eigvalsh(random_state(4, 4, 9).matrix).min() > 0

    def test_bad_rank(self):
        with pytest.raises(BadRank):
            random_state(2, 3, 0)
        with pytest.raises(BadRank):
            random_state(2, 0, 0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6), data=st.data())
    def test_numerical_rank(self, seed, d, data):
        r = data.draw(st.integers(1, d))
        rho = random_state(d, r, seed)
        assert_valid_density(rho)
        assert int(np.sum(np.linalg.eigvalsh(rho.matrix) > 1e-10)) == r


class TestMisc:
    def test_distribution_validation(self):
        with pytest.raises(BadDistribution):
            ProbabilityDistribution([0.5, 0.6])
        with pytest.raises(BadDistribution):
            ProbabilityDistribution([1.5, -0.5])
        assert len(ProbabilityDistribution([0.25, 0.75])) == 2

    def test_fidelity(self):
        assert fidelity(pure_state(KET0), pure_state(PLUS)) == pytest.approx(0.5, abs=1e-12)
        rho = random_state(3, 3, 1)
        assert fidelity(rho, rho) == pytest.approx(1, abs=1e-10)
        assert fidelity(pure_state(KET0), pure_state(KET1)) == pytest.approx(0, abs=1e-12)
