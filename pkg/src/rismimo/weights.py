"""Codeword weight optimization for the weighted-DFT reflection design.

The training stage leaves a stacked channel estimate; the weight vector k
combines the Q observed codewords into one reflection vector by maximizing
the quadratic capacity lower bound u^H B u over u = A_Q k with every entry
of u constrained to unit modulus. The maximizer is found by the phase-align
fixed point u <- exp(j*angle(B u)) projected back onto the codeword span.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalRankError
from .training import StackedChannel

__all__ = [
    "WeightProblem",
    "WeightSolution",
    "stream_basis",
    "block_gram",
    "initial_weights",
    "optimize_weights",
    "compose_reflection",
]

_RANK_RTOL = 1e-12


@dataclass
class WeightProblem:
    b: np.ndarray                 # (N+1, N+1) Hermitian PSD
    a_q: np.ndarray               # (N+1, Q), full column rank
    k0: np.ndarray                # (Q,) initial weights
    tolerance: float = 1e-8      # relative objective change
    max_iterations: int = 100


@dataclass
class WeightSolution:
    k: np.ndarray
    upsilon: np.ndarray           # Lagrange multipliers |B A_Q k|
    phi: np.ndarray               # composed unit-modulus RC vector, length N
    objective_trace: np.ndarray = field(repr=False, default=None)
    iterations: int = 0
    converged: bool = False


def _check_full_column_rank(a_q: np.ndarray, what: str):
    s = np.linalg.svd(a_q, compute_uv=False)
    if s[0] == 0 or s[-1] < _RANK_RTOL * s[0] or len(s) < a_q.shape[1]:
        raise NumericalRankError(f"{what} is rank deficient")


def _span_projector(a_q: np.ndarray) -> np.ndarray:
    """(A^H A)^{-1} A^H, the least-squares map from targets onto weights."""
    gram = a_q.conj().T @ a_q
    return np.linalg.solve(gram, a_q.conj().T)


def stream_basis(estimate: StackedChannel, n_streams: int) -> np.ndarray:
    """Scaled top right-singular-vector basis of the adjoint stacked channel.

    Returns sqrt((N+1)/n_streams) * V[:, :n_streams] from the SVD of
    estimate.matrix^H, shape ((N+1)*M_t, n_streams), singular values descending.
    """
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    adj = estimate.matrix.conj().T
    _, s, vh = np.linalg.svd(adj, full_matrices=False)
    rank = int(np.sum(s > max(s[0], 0.0) * 1e-12)) if s.size else 0
    if n_streams > rank:
        raise NumericalRankError(
            f"requested {n_streams} streams but channel rank is {rank}")
    v = vh.conj().T[:, :n_streams]
    return np.sqrt(estimate.n_blocks / n_streams) * v


def block_gram(p: np.ndarray, m_t: int) -> np.ndarray:
    """Gram matrix of the M_t-row blocks of p under the trace inner product.

    Entry (i, j) is trace(P_j^H P_i); Hermitian positive semidefinite.
    """
    n_blocks = p.shape[0] // m_t
    flat = p.reshape(n_blocks, -1)
    gram = flat @ flat.conj().T
    return 0.5 * (gram + gram.conj().T)


def initial_weights(a_q: np.ndarray, codeword: np.ndarray) -> np.ndarray:
    """Project the best-observed codeword onto the weight space.

    The N-entry codeword is embedded with a leading 1 for the direct-channel
    row, so a codeword already in the selected DFT set maps to a standard
    unit vector exactly.
    """
    _check_full_column_rank(a_q, "codeword matrix A_Q")
    embedded = np.concatenate([[1.0 + 0.0j], np.asarray(codeword, dtype=complex)])
    return _span_projector(a_q) @ embedded


def optimize_weights(problem: WeightProblem) -> WeightSolution:
    """Run the phase-align fixed point until the objective stalls.

    Each step forms v = B A_Q k, takes the unit-modulus target exp(j*angle(v))
    (zero entries map to 1), and solves the target back to weights by least
    squares. The objective Re(u^H B u) is non-decreasing when Q = N+1. The
    returned k is rotated so the direct-channel row of A_Q k has zero phase,
    which fixes the otherwise-free global phase without touching the
    objective.
    """
    b, a_q = problem.b, problem.a_q
    scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
    if np.max(np.abs(b - b.conj().T)) > 1e-10 * scale:
        raise ValueError("B must be Hermitian")
    _check_full_column_rank(a_q, "codeword matrix A_Q")
    solver = _span_projector(a_q)

    k = np.asarray(problem.k0, dtype=complex).copy()
    upsilon = np.abs(b @ (a_q @ k))
    trace = [float(np.real(np.vdot(a_q @ k, b @ (a_q @ k))))]
    converged = False
    iterations = 0
    for _ in range(problem.max_iterations):
        v = b @ (a_q @ k)
        mag = np.abs(v)
        target = np.where(mag > 0.0, v / np.where(mag > 0.0, mag, 1.0), 1.0 + 0.0j)
        upsilon = mag
        k = solver @ target
        obj = float(np.real(np.vdot(a_q @ k, b @ (a_q @ k))))
        if not np.isfinite(obj):
            raise FloatingPointError("weight objective became non-finite")
        trace.append(obj)
        iterations += 1
        if abs(trace[-1] - trace[-2]) <= problem.tolerance * max(abs(trace[-2]), 1e-300):
            converged = True
            break

    # Free global phase: anchor the direct-channel row to 1 so the composed RC
    # keeps the optimized phase offset between direct and cascaded paths.
    anchor = (a_q @ k)[0]
    if np.abs(anchor) > 1e-12:
        k = k * (np.conj(anchor) / np.abs(anchor))
    upsilon = np.abs(b @ (a_q @ k))
    return WeightSolution(
        k=k, upsilon=upsilon, phi=compose_reflection(a_q, k),
        objective_trace=np.asarray(trace), iterations=iterations,
        converged=converged)


def compose_reflection(a_q: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Weighted codeword sum projected entrywise to unit modulus.

    Rows 1..N of A_Q k are the raw RC vector; zero-magnitude entries map to 1.
    """
    if not np.all(np.isfinite(k)):
        raise FloatingPointError("weights must be finite")
    raw = (a_q @ np.asarray(k, dtype=complex))[1:]
    mag = np.abs(raw)
    return np.where(mag > 0.0, raw / np.where(mag > 0.0, mag, 1.0), 1.0 + 0.0j)
