"""Downlink SVD precoding, water-filling power allocation, and MIMO capacity."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import NoChannelError

__all__ = [
    "PrecoderSolution",
    "CapacityRecord",
    "effective_channel",
    "waterfill",
    "svd_precoder",
    "capacity",
]


@dataclass
class PrecoderSolution:
    w: np.ndarray                 # (M_t, M_s)
    powers: np.ndarray            # per-stream watts, sum = p_d when any active
    eta: float                    # water-level threshold, 1/watts
    active_streams: int


@dataclass
class CapacityRecord:
    """One scheme's downlink capacity for one trial, with provenance."""

    scheme: str
    capacity: float               # bits/s/Hz, evaluated on the true channel
    q_used: int
    p_d_dbm: float
    p_u_dbm: float
    n_elements: int
    trial: int
    seed: int
    iterations: int = 0
    converged: bool = True


def effective_channel(realization: ChannelRealization, phi: np.ndarray,
                      check_modulus: bool = True) -> np.ndarray:
    """Composite downlink channel H_d + H_r diag(phi) H_t for RC vector phi.

    Warns (diagnostic, does not fail) when phi is not unit modulus; pass
    check_modulus=False for intentionally attenuating configurations.
    """
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (realization.n_elements,):
        raise ValueError(
            f"phi must have length {realization.n_elements}, got shape {phi.shape}")
    if check_modulus:
        mod_err = float(np.max(np.abs(np.abs(phi) - 1.0))) if phi.size else 0.0
        if mod_err > 1e-6:
            warnings.warn(f"RC vector deviates from unit modulus by {mod_err:.2e}",
                          stacklevel=2)
    return realization.h_d + (realization.h_r * phi[None, :]) @ realization.h_t


def waterfill(singular_values: np.ndarray, p_d: float, noise_power: float):
    """Exact water-filling over eigen-channels with gains singular_values**2.

    Returns (powers, eta) with sum(powers) == p_d; stream i gets
    max(1/eta - noise_power/sv_i^2, 0). Solved in closed form by scanning
    active prefixes of the descending singular values.
    """
    sv = np.asarray(singular_values, dtype=float)
    if p_d <= 0:
        raise ValueError("p_d must be positive")
    if np.any(sv < 0) or np.any(np.diff(sv) > 0):
        raise ValueError("singular values must be nonnegative and descending")
    positive = int(np.sum(sv > 0))
    if positive == 0:
        raise NoChannelError("all singular values are zero")
    floors = np.zeros_like(sv)
    floors[:positive] = noise_power / sv[:positive] ** 2
    powers = np.zeros_like(sv)
    for m in range(positive, 0, -1):
        level = (p_d + floors[:m].sum()) / m
        if level > floors[m - 1]:
            powers[:m] = level - floors[:m]
            return powers, 1.0 / level
    raise AssertionError("water-filling found no feasible active set")


def svd_precoder(h_e: np.ndarray, n_streams: int, p_d: float,
                 noise_power: float) -> PrecoderSolution:
    """SVD precoder with water-filled per-stream powers.

    Columns of W are the top right singular vectors of h_e scaled by
    sqrt(power); streams beyond the channel rank get zero power. An all-zero
    channel yields the zero precoder.
    """
    m_r, m_t = h_e.shape
    if not 1 <= n_streams <= min(m_t, m_r):
        raise ValueError(
            f"n_streams must lie in [1, {min(m_t, m_r)}], got {n_streams}")
    _, s, vh = np.linalg.svd(h_e, full_matrices=False)
    v = vh.conj().T[:, :n_streams]
    sv = s[:n_streams]
    try:
        powers, eta = waterfill(sv, p_d, noise_power)
    except NoChannelError:
        return PrecoderSolution(w=np.zeros((m_t, n_streams), dtype=complex),
                                powers=np.zeros(n_streams), eta=np.inf,
                                active_streams=0)
    w = v * np.sqrt(powers)[None, :]
    return PrecoderSolution(w=w, powers=powers, eta=eta,
                            active_streams=int(np.sum(powers > 0)))


def capacity(h_e: np.ndarray, w: np.ndarray, noise_power: float) -> float:
    """log2 det(I + H_e W W^H H_e^H / noise_power), in bits/s/Hz."""
    if not (np.all(np.isfinite(h_e)) and np.all(np.isfinite(w))):
        raise FloatingPointError("non-finite channel or precoder")
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    g = h_e @ w
    m = np.eye(h_e.shape[0], dtype=complex) + (g @ g.conj().T) / noise_power
    _, logdet = np.linalg.slogdet(m)
    return max(float(logdet) / float(np.log(2.0)), 0.0)
