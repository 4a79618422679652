import numpy as np
import pytest

from rismimo.codebook import dft_codebook, dft_matrix
from rismimo.errors import NumericalRankError
from rismimo.training import StackedChannel, stack_channels
from rismimo.weights import (WeightProblem, block_gram, compose_reflection,
                             initial_weights, optimize_weights, stream_basis)

from conftest import make_realization


def random_stack(seed, n=6, m_t=2, m_r=2):
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal(((n + 1) * m_t, m_r)) + \
        1j * rng.standard_normal(((n + 1) * m_t, m_r))
    return StackedChannel(matrix=mat, m_t=m_t)


def random_gram(seed, n=6, m_t=2, m_s=2):
    rng = np.random.default_rng(seed)
    p = rng.standard_normal(((n + 1) * m_t, m_s)) + \
        1j * rng.standard_normal(((n + 1) * m_t, m_s))
    return block_gram(p, m_t)


def objective(b, a_q, k):
    u = a_q @ k
    return float(np.real(np.vdot(u, b @ u)))


class TestStreamBasis:
    def test_scaled_orthonormal_columns(self):
        stack = random_stack(0, n=5, m_t=2, m_r=3)
        p = stream_basis(stack, 2)
        gram = p.conj().T @ p
        np.testing.assert_allclose(gram, (6 / 2) * np.eye(2), atol=1e-9)

    def test_frobenius_norm_identity(self):
        stack = random_stack(1, n=1, m_t=1, m_r=2)
        p = stream_basis(stack, 1)
        # ||P||_F^2 = (N+1)/m_s * m_s_columns = 2 for N=1, m_s=1
        assert np.linalg.norm(p, "fro") ** 2 == pytest.approx(2.0)

    def test_matches_independent_svd(self):
        stack = random_stack(2, n=3, m_t=2, m_r=2)
        p = stream_basis(stack, 2)
        # independent recomputation through the eigen-decomposition of M^H M
        adj = stack.matrix.conj().T
        evals, evecs = np.linalg.eigh(adj.conj().T @ adj)
        top = evecs[:, np.argsort(evals)[::-1][:2]]
        scale = np.sqrt(stack.n_blocks / 2)
        # columns agree up to per-column phase: compare projectors
        proj_a = p @ p.conj().T
        proj_b = (scale * top) @ (scale * top).conj().T
        np.testing.assert_allclose(proj_a, proj_b, atol=1e-8)

    def test_rank_deficiency_rejected(self):
        mat = np.zeros((8, 2), dtype=complex)
        mat[0, 0] = 1.0
        with pytest.raises(NumericalRankError):
            stream_basis(StackedChannel(matrix=mat, m_t=2), 2)


class TestBlockGram:
    def test_identical_blocks_all_ones_structure(self):
        block = (np.arange(6).reshape(2, 3) + 1.0).astype(complex)
        p = np.vstack([block] * 4)
        gram = block_gram(p, 2)
        c = np.linalg.norm(block, "fro") ** 2
        np.testing.assert_allclose(gram, c * np.ones((4, 4)), atol=1e-10)

    def test_orthogonal_blocks_diagonal(self):
        p = np.zeros((4, 2), dtype=complex)
        p[0, 0] = 1.0   # block 0 uses column 0
        p[2, 1] = 2.0   # block 1 uses column 1: trace inner product vanishes
        gram = block_gram(p, 2)
        np.testing.assert_allclose(gram, np.diag([1.0, 4.0]), atol=1e-12)

    def test_hermitian_psd(self):
        for seed in range(5):
            gram = random_gram(seed)
            np.testing.assert_allclose(gram, gram.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(gram).min() >= -1e-10

    def test_entry_is_trace_inner_product(self):
        p = random_stack(3, n=2, m_t=2, m_r=3).matrix
        gram = block_gram(p, 2)
        blocks = p.reshape(3, 2, 3)
        for i in range(3):
            for j in range(3):
                expected = np.trace(blocks[j].conj().T @ blocks[i])
                assert gram[i, j] == pytest.approx(expected, abs=1e-12)


class TestInitialWeights:
    def test_own_codeword_gives_unit_vector(self):
        book = dft_codebook(6, 5)
        k = initial_weights(book.a_matrix, book.codewords[2])
        expected = np.zeros(5)
        expected[2] = 1.0
        np.testing.assert_allclose(k, expected, atol=1e-10)

    def test_full_basis_reconstructs_any_rc(self):
        book = dft_codebook(6, 7)
        rng = np.random.default_rng(0)
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        k = initial_weights(book.a_matrix, phi)
        np.testing.assert_allclose(book.a_matrix @ k,
                                   np.concatenate([[1.0], phi]), atol=1e-9)

    def test_least_squares_against_normal_equations(self):
        book = dft_codebook(6, 4)
        rng = np.random.default_rng(1)
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        k = initial_weights(book.a_matrix, phi)
        a = book.a_matrix
        target = np.concatenate([[1.0], phi])
        oracle = np.linalg.solve(a.conj().T @ a, a.conj().T @ target)
        np.testing.assert_allclose(k, oracle, atol=1e-10)

    def test_rank_deficient_rejected(self):
        a = np.ones((3, 2), dtype=complex)
        with pytest.raises(NumericalRankError):
            initial_weights(a, np.ones(2, dtype=complex))


class TestOptimizeWeights:
    def test_identity_gram_is_immediate_fixed_point(self):
        n = 5
        a = dft_matrix(n + 1)
        k0 = np.zeros(n + 1, dtype=complex)
        k0[3] = 1.0     # feasible: A k0 is a DFT column, unit modulus
        sol = optimize_weights(WeightProblem(b=np.eye(n + 1, dtype=complex),
                                             a_q=a, k0=k0))
        assert sol.converged and sol.iterations == 1
        np.testing.assert_allclose(sol.objective_trace, sol.objective_trace[0])

    def test_rank_one_gram_aligns_in_one_step(self):
        n = 4
        a = dft_matrix(n + 1)
        rng = np.random.default_rng(2)
        b_vec = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        gram = np.outer(b_vec, b_vec.conj())
        k0 = np.zeros(n + 1, dtype=complex)
        k0[0] = 1.0
        sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
        expected = (np.sum(np.abs(b_vec))) ** 2
        assert sol.objective_trace[-1] == pytest.approx(expected, rel=1e-9)
        assert sol.objective_trace[1] == pytest.approx(expected, rel=1e-9)

    def test_matches_phase_grid_search(self):
        # N=3 exhaustive oracle: 64^3 grid over free phases (entry 0 pinned by
        # global-phase invariance)
        n = 3
        a = dft_matrix(n + 1)
        gram = random_gram(7, n=n, m_t=1, m_s=1)
        k0 = np.zeros(n + 1, dtype=complex)
        k0[0] = 1.0
        sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
        grid = np.exp(1j * 2 * np.pi * np.arange(64) / 64)
        p1, p2, p3 = np.meshgrid(grid, grid, grid, indexing="ij")
        us = np.stack([np.ones_like(p1), p1, p2, p3], axis=-1).reshape(-1, 4)
        values = np.einsum("ki,ij,kj->k", us.conj(), gram, us).real
        assert sol.objective_trace[-1] >= 0.99 * values.max()

    def test_monotone_trace_and_feasibility(self):
        for seed in range(10):
            n = int(np.random.default_rng(seed).integers(2, 12))
            a = dft_matrix(n + 1)
            gram = random_gram(seed, n=n)
            k0 = np.zeros(n + 1, dtype=complex)
            k0[0] = 1.0
            sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
            diffs = np.diff(sol.objective_trace)
            floor = -1e-9 * np.maximum(1.0, np.abs(sol.objective_trace[:-1]))
            assert np.all(diffs >= floor)
            assert np.max(np.abs(np.abs(a @ sol.k) - 1.0)) <= 1e-6

    def test_global_phase_invariance(self):
        n = 6
        a = dft_matrix(n + 1)
        gram = random_gram(4, n=n)
        k0 = np.zeros(n + 1, dtype=complex)
        k0[1] = 1.0
        base = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
        rotated = optimize_weights(WeightProblem(b=gram, a_q=a,
                                                 k0=np.exp(1.3j) * k0))
        assert base.objective_trace[-1] == pytest.approx(
            rotated.objective_trace[-1], rel=1e-8)

    def test_fixed_point_condition_at_convergence(self):
        # B A k = diag(upsilon) A k at a converged full-overhead solution
        n = 5
        a = dft_matrix(n + 1)
        gram = random_gram(9, n=n)
        k0 = np.zeros(n + 1, dtype=complex)
        k0[0] = 1.0
        sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0,
                                             tolerance=1e-14,
                                             max_iterations=2000))
        u = a @ sol.k
        residual = gram @ u - sol.upsilon * u
        assert np.max(np.abs(residual)) <= 1e-4 * np.max(np.abs(gram @ u))

    def test_direct_row_anchored(self):
        n = 5
        a = dft_matrix(n + 1)
        gram = random_gram(11, n=n)
        k0 = np.zeros(n + 1, dtype=complex)
        k0[2] = 1.0
        sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
        anchor = (a @ sol.k)[0]
        assert anchor.imag == pytest.approx(0.0, abs=1e-9)
        assert anchor.real > 0

    def test_objective_real_for_hermitian_gram(self):
        gram = random_gram(5)
        a = dft_matrix(7)
        rng = np.random.default_rng(3)
        for _ in range(10):
            k = rng.standard_normal(7) + 1j * rng.standard_normal(7)
            u = a @ k
            value = np.vdot(u, gram @ u)
            assert abs(value.imag) <= 1e-10 * max(1.0, abs(value.real))

    def test_non_hermitian_rejected(self):
        a = dft_matrix(3)
        bad = np.array([[1, 2], [3, 4]], dtype=complex)
        with pytest.raises(ValueError):
            optimize_weights(WeightProblem(b=np.pad(bad, (0, 1)), a_q=a,
                                           k0=np.array([1, 0, 0], complex)))

    def test_upsilon_nonnegative(self):
        sol = optimize_weights(WeightProblem(
            b=random_gram(6), a_q=dft_matrix(7),
            k0=np.eye(7, dtype=complex)[0]))
        assert np.all(sol.upsilon >= 0)


class TestComposeReflection:
    def test_unit_vector_weight_recovers_codeword(self):
        book = dft_codebook(6, 4)
        k = np.zeros(4, dtype=complex)
        k[1] = 1.0
        np.testing.assert_allclose(compose_reflection(book.a_matrix, k),
                                   book.codewords[1], atol=1e-12)

    def test_zero_entry_maps_to_one(self):
        a = np.array([[1.0, 1.0], [1.0, -1.0], [1.0, 1.0]], dtype=complex)
        k = np.array([0.5, 0.5], dtype=complex)
        phi = compose_reflection(a, k)
        # row 1 of a @ k is 0 -> mapped to 1; row 2 is 1
        np.testing.assert_allclose(phi, [1.0, 1.0])

    def test_projection_is_noop_after_full_overhead_convergence(self):
        gram = random_gram(8, n=6)
        a = dft_matrix(7)
        k0 = np.eye(7, dtype=complex)[0]
        sol = optimize_weights(WeightProblem(b=gram, a_q=a, k0=k0))
        raw = (a @ sol.k)[1:]
        assert np.max(np.abs(np.abs(raw) - 1.0)) <= 1e-6
        np.testing.assert_allclose(sol.phi, raw / np.abs(raw), atol=1e-9)

    def test_unit_modulus_output(self):
        rng = np.random.default_rng(5)
        book = dft_codebook(10, 4)
        k = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi = compose_reflection(book.a_matrix, k)
        np.testing.assert_allclose(np.abs(phi), 1.0, atol=1e-12)


class TestPipelineOnRealChannel:
    def test_end_to_end_shapes(self):
        real, _ = make_realization(seed=6, n_x=3, n_y=2, m_t=2, m_r=2)
        stack = stack_channels(real)
        p = stream_basis(stack, 2)
        gram = block_gram(p, 2)
        book = dft_codebook(6, 7)
        k0 = initial_weights(book.a_matrix, book.codewords[0])
        sol = optimize_weights(WeightProblem(b=gram, a_q=book.a_matrix, k0=k0))
        assert sol.phi.shape == (6,)
        np.testing.assert_allclose(np.abs(sol.phi), 1.0, atol=1e-12)
