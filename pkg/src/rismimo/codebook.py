"""DFT and random reflection codebooks plus codeword configuration orders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization

__all__ = [
    "Codebook",
    "dft_matrix",
    "dft_codebook",
    "random_codebook",
    "environment_aware_order",
]


@dataclass
class Codebook:
    """Q reflection codewords and their selection matrix.

    codewords: (Q, N) unit-modulus rows, one per training block in
    configuration order. a_matrix: (N+1, Q); column q is codeword q with a
    leading entry that multiplies the direct channel in the stacked model
    (for DFT codebooks these are columns of the (N+1)-point DFT, so the
    leading entry is 1 and the columns are mutually orthogonal).
    order: the codeword indices used, in configuration order.
    """

    codewords: np.ndarray
    a_matrix: np.ndarray
    order: np.ndarray

    @property
    def q(self) -> int:
        return self.codewords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.codewords.shape[1]


def dft_matrix(size: int) -> np.ndarray:
    """Unnormalized DFT matrix, entry (m, n) = exp(-j*2pi*m*n/size). Symmetric."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    idx = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / size)


def _validate_order(order, n_plus_1: int, q: int) -> np.ndarray:
    order = np.asarray(order, dtype=int)
    if order.ndim != 1 or len(order) < q:
        raise ValueError(f"order must list at least {q} codeword indices")
    if len(np.unique(order)) != len(order):
        raise ValueError("order must not repeat codeword indices")
    if order.min() < 0 or order.max() >= n_plus_1:
        raise ValueError(f"order indices must lie in [0, {n_plus_1 - 1}]")
    return order[:q]


def dft_codebook(n_elements: int, q: int, order=None) -> Codebook:
    """First q codewords of the (N+1)-point DFT codebook in the given order.

    Codeword i is rows 1..N of DFT column order[i] (0-based columns); row 0
    of that column is kept in a_matrix as the direct-channel entry. Default
    order is sequential (columns 0..q-1).
    """
    n_plus_1 = n_elements + 1
    if not 1 <= q <= n_plus_1:
        raise ValueError(f"q must lie in [1, {n_plus_1}], got {q}")
    if order is None:
        order = np.arange(q)
    order = _validate_order(order, n_plus_1, q)
    a_full = dft_matrix(n_plus_1)
    a_matrix = a_full[:, order]
    return Codebook(codewords=a_matrix[1:, :].T.copy(), a_matrix=a_matrix, order=order)


def random_codebook(n_elements: int, q: int, rng: np.random.Generator) -> Codebook:
    """q codewords with i.i.d. phases uniform on [0, 2pi)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(q, n_elements))
    codewords = np.exp(1j * phases)
    a_matrix = np.vstack([np.ones((1, q)), codewords.T])
    return Codebook(codewords=codewords, a_matrix=a_matrix, order=np.arange(q))


def environment_aware_order(realization: ChannelRealization,
                            codebook: Codebook | None = None,
                            m_t: int = 0, m_r: int = 0) -> np.ndarray:
    """Rank all N+1 DFT codewords by LoS alignment, best first.

    The score of codeword q is |d + r diag(cw_q) t|^2 on the scaled LoS
    components, evaluated at one reference antenna pair (0-based m_t, m_r).
    Ties break toward the lower codeword index.
    """
    n = realization.n_elements
    if codebook is None:
        codebook = dft_codebook(n, n + 1)
    if not 0 <= m_t < realization.h_d.shape[1]:
        raise ValueError(f"m_t out of range: {m_t}")
    if not 0 <= m_r < realization.h_d.shape[0]:
        raise ValueError(f"m_r out of range: {m_r}")
    direct = realization.los_d[m_r, m_t]
    cascade = realization.los_r[m_r, :] * realization.los_t[:, m_t]
    scores = np.abs(direct + codebook.codewords @ cascade) ** 2
    return np.argsort(-scores, kind="stable")
