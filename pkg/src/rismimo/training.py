"""Uplink pilot protocol, observation stacking, and channel estimation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .codebook import Codebook
from .errors import NumericalRankError

__all__ = [
    "StackedChannel",
    "TrainingObservation",
    "orthogonal_pilot",
    "stack_channels",
    "uplink_receive",
    "collect_observations",
    "estimate_stacked",
    "estimate_composite",
]

_RANK_RTOL = 1e-10


@dataclass
class StackedChannel:
    """Direct channel stacked over the N rank-1 per-element cascaded channels.

    matrix has shape ((N+1)*M_t, M_r); block 0 is the adjoint direct channel,
    block n >= 1 the adjoint cascade through RIS element n.
    """

    matrix: np.ndarray
    m_t: int

    @property
    def n_blocks(self) -> int:
        return self.matrix.shape[0] // self.m_t

    def blocks(self) -> np.ndarray:
        """View as (N+1, M_t, M_r)."""
        return self.matrix.reshape(self.n_blocks, self.m_t, -1)

    def composite(self, phi: np.ndarray) -> np.ndarray:
        """Downlink composite channel (M_r, M_t) for RC vector phi of length N."""
        weights = np.concatenate([[1.0 + 0.0j], np.asarray(phi, dtype=complex)])
        return np.einsum("n,ntr->rt", weights, self.blocks().conj())


@dataclass
class TrainingObservation:
    """Received pilots across Q training blocks for one codebook order."""

    y_stack: np.ndarray                       # (Q*M_t, tau)
    per_block: list = field(repr=False, default_factory=list)
    codebook: Codebook = None
    pilot: np.ndarray = None                  # (M_r, tau)
    m_t: int = 0


def orthogonal_pilot(m_r: int, tau: int, power: float) -> np.ndarray:
    """Orthogonal pilot matrix: first m_r rows of the tau-point DFT, scaled so
    X X^H = (tau*power/m_r) I and ||X||_F^2 = tau*power."""
    if tau < m_r:
        raise ValueError(f"tau must be >= m_r, got tau={tau}, m_r={m_r}")
    if m_r < 1:
        raise ValueError("m_r must be >= 1")
    m = np.arange(m_r)[:, None]
    t = np.arange(tau)[None, :]
    return np.sqrt(power / m_r) * np.exp(-2j * np.pi * m * t / tau)


def stack_channels(realization: ChannelRealization) -> StackedChannel:
    """Assemble the ground-truth stacked channel from one realization.

    Block n >= 1 is the outer product of column n of H_t^H with row n of
    H_r^H, so that for any RC phi the composite identity
    H_d^H + sum_n conj(phi_n) * block_n == (H_d + H_r diag(phi) H_t)^H holds.
    """
    h_t, h_r, h_d = realization.h_t, realization.h_r, realization.h_d
    n, m_t = h_t.shape
    m_r = h_r.shape[0]
    blocks = np.empty((n + 1, m_t, m_r), dtype=complex)
    blocks[0] = h_d.conj().T
    # h_t.conj() rows are the columns of H_t^H; h_r.conj() columns are rows of H_r^H.
    blocks[1:] = h_t.conj()[:, :, None] * h_r.conj().T[:, None, :]
    return StackedChannel(matrix=blocks.reshape((n + 1) * m_t, m_r), m_t=m_t)


def uplink_receive(realization: ChannelRealization, codeword: np.ndarray,
                   pilot: np.ndarray, noise_power: float,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """One training block: Y = (H_d^H + H_t^H diag(conj(cw)) H_r^H) X + noise."""
    h_eff_adj = realization.h_d.conj().T + (
        realization.h_t.conj().T * np.conj(codeword)[None, :]) @ realization.h_r.conj().T
    y = h_eff_adj @ pilot
    if noise_power > 0:
        if rng is None:
            raise ValueError("rng required when noise_power > 0")
        noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + np.sqrt(noise_power / 2.0) * noise
    return y


def collect_observations(realization: ChannelRealization, codebook: Codebook,
                         pilot: np.ndarray, noise_power: float,
                         block_rng) -> TrainingObservation:
    """Run the Q training blocks in codebook order and stack the receptions.

    block_rng(i) must return an independent generator for block i so the noise
    of block i does not depend on Q.
    """
    per_block = []
    for i in range(codebook.q):
        rng = block_rng(i) if noise_power > 0 else None
        per_block.append(uplink_receive(realization, codebook.codewords[i],
                                        pilot, noise_power, rng))
    m_t = realization.h_t.shape[1]
    return TrainingObservation(
        y_stack=np.vstack(per_block), per_block=per_block,
        codebook=codebook, pilot=pilot, m_t=m_t)


def _pilot_gram_solve(pilot: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (X X^H) Z = rhs, rejecting singular pilot Grams."""
    gram = pilot @ pilot.conj().T
    s = np.linalg.svd(gram, compute_uv=False)
    if s[0] == 0 or s[-1] < _RANK_RTOL * s[0]:
        raise NumericalRankError("pilot Gram X X^H is singular")
    return np.linalg.solve(gram, rhs)


def estimate_stacked(obs: TrainingObservation) -> StackedChannel:
    """Least-squares / minimum-norm estimate of the stacked channel.

    Computes (A_Q (A_Q^H A_Q)^{-1} kron I_{M_t}) Y X^H (X X^H)^{-1}; exact for
    Q = N+1 with noiseless observations, the minimum-Frobenius-norm solution
    for Q < N+1.
    """
    a_q = obs.codebook.a_matrix
    n_plus_1, q = a_q.shape
    gram = a_q.conj().T @ a_q
    s = np.linalg.svd(gram, compute_uv=False)
    if s[0] == 0 or s[-1] < _RANK_RTOL * s[0]:
        raise NumericalRankError("codeword matrix A_Q is rank deficient")
    combine = a_q @ np.linalg.inv(gram)                     # (N+1, Q)
    t = _pilot_gram_solve(obs.pilot, (obs.y_stack @ obs.pilot.conj().T).conj().T).conj().T
    t_blocks = t.reshape(q, obs.m_t, -1)
    est = np.einsum("nq,qtr->ntr", combine, t_blocks)
    return StackedChannel(matrix=est.reshape(n_plus_1 * obs.m_t, -1), m_t=obs.m_t)


def estimate_composite(y_block: np.ndarray, pilot: np.ndarray) -> np.ndarray:
    """Per-block composite channel estimate (Y X^H (X X^H)^{-1})^H, shape (M_r, M_t)."""
    z = _pilot_gram_solve(pilot, (y_block @ pilot.conj().T).conj().T).conj().T
    return z.conj().T
