"""Geometry, steering vectors, and Rician channel synthesis.

Conventions (wavelength normalized to 1, spacings in wavelengths):
  * BS and UE linear arrays lie along the global x axis; the steering angle
    of a link direction u is arcsin(u_x).
  * The RIS planar array lies in the x-z plane (within-row index along x,
    row index along z), boresight -y. Azimuth/elevation of a unit direction
    u = (u_x, u_y, u_z) are chosen so the array phase of element (row r,
    column c) equals 2*pi*d*(c*u_x + r*u_z): azimuth = atan2(u_z, u_x),
    elevation = arcsin(hypot(u_x, u_z)); when atan2 is negative the azimuth
    is wrapped by +pi and the elevation sign flipped, which preserves that
    phase identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError

__all__ = [
    "ArrayGeometry",
    "LinkStatistics",
    "LinkAngles",
    "ChannelRealization",
    "ula_steering",
    "upa_steering",
    "path_loss",
    "derive_los_angles",
    "random_los_angles",
    "sample_rician",
    "sample_channels",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Terminal positions (meters) and array layouts for one deployment."""

    bs_position: tuple[float, float, float] = (0.0, 0.0, 5.0)
    ris_position: tuple[float, float, float] = (0.0, 100.0, 5.0)
    ue_position: tuple[float, float, float] = (3.0, 100.0, 0.0)
    bs_spacing: float = 0.5
    ue_spacing: float = 0.5
    ris_spacing: float = 0.25
    n_x: int = 5
    n_y: int = 5
    m_t: int = 4
    m_r: int = 4

    def __post_init__(self):
        for name in ("n_x", "n_y", "m_t", "m_r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("bs_spacing", "ue_spacing", "ris_spacing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        points = [np.asarray(p, dtype=float) for p in
                  (self.bs_position, self.ris_position, self.ue_position)]
        names = ("bs", "ris", "ue")
        for i in range(3):
            for j in range(i + 1, 3):
                if np.linalg.norm(points[i] - points[j]) == 0.0:
                    raise DegenerateGeometryError(
                        f"{names[i]} and {names[j]} positions coincide")

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y


@dataclass(frozen=True)
class LinkStatistics:
    """Large-scale statistics of one link: Rician factor and power-law loss.

    rician_factor is the linear LoS/NLoS power ratio (inf = pure LoS);
    reference_loss is the linear power gain at reference_distance meters.
    """

    rician_factor: float
    path_loss_exponent: float
    reference_loss: float = 1e-2
    reference_distance: float = 1.0

    def __post_init__(self):
        if not (self.rician_factor >= 0 or math.isinf(self.rician_factor)):
            raise ValueError("rician_factor must be >= 0 (inf allowed)")
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be positive")
        if self.reference_loss <= 0 or self.reference_distance <= 0:
            raise ValueError("reference_loss and reference_distance must be positive")


@dataclass(frozen=True)
class LinkAngles:
    """LoS departure/arrival angles (radians) for the three links."""

    bs_ris_aod: float          # at the BS array, toward the RIS
    ris_bs_azimuth: float      # at the RIS, from the BS
    ris_bs_elevation: float
    ris_ue_azimuth: float      # at the RIS, toward the UE
    ris_ue_elevation: float
    ue_ris_aoa: float          # at the UE array, from the RIS
    bs_ue_aod: float           # at the BS array, toward the UE
    ue_bs_aoa: float           # at the UE array, from the BS


@dataclass
class ChannelRealization:
    """One Monte Carlo draw of the three channels plus their scaled LoS parts.

    h_t: (N, M_t) BS->RIS, h_r: (M_r, N) RIS->UE, h_d: (M_r, M_t) BS->UE.
    los_* hold sqrt(beta * F/(F+1)) times the rank-1 LoS outer product.
    """

    h_t: np.ndarray
    h_r: np.ndarray
    h_d: np.ndarray
    los_t: np.ndarray = field(repr=False, default=None)
    los_r: np.ndarray = field(repr=False, default=None)
    los_d: np.ndarray = field(repr=False, default=None)

    @property
    def n_elements(self) -> int:
        return self.h_t.shape[0]


def ula_steering(angle: float, count: int, spacing: float) -> np.ndarray:
    """Steering vector of a uniform linear array: entry m = exp(j*2pi*m*d*sin(angle))."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    m = np.arange(count)
    return np.exp(1j * 2.0 * np.pi * spacing * np.sin(angle) * m)


def upa_steering(azimuth: float, elevation: float, n_x: int, n_y: int,
                 spacing: float) -> np.ndarray:
    """Steering vector of the RIS planar array, flattened row-major.

    Element n (0-based) sits at row n // n_x, column n % n_x; its phase is
    2*pi*d*sin(elevation)*(row*sin(azimuth) + col*cos(azimuth)).
    """
    if n_x < 1 or n_y < 1:
        raise ValueError(f"n_x and n_y must be >= 1, got {n_x}x{n_y}")
    n = np.arange(n_x * n_y)
    row = n // n_x
    col = n - row * n_x
    phase = 2.0 * np.pi * spacing * np.sin(elevation) * (
        row * np.sin(azimuth) + col * np.cos(azimuth))
    return np.exp(1j * phase)


def path_loss(distance: float, stats: LinkStatistics) -> float:
    """Linear power gain C0 * (d/d0)^(-alpha)."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return stats.reference_loss * (distance / stats.reference_distance) ** (
        -stats.path_loss_exponent)


def _unit(src, dst) -> np.ndarray:
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    diff = dst - src
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        raise DegenerateGeometryError("link endpoints coincide")
    return diff / norm


def _upa_angles(u: np.ndarray) -> tuple[float, float]:
    # Azimuth wrapped into [0, pi]; a negative atan2 flips the elevation sign
    # instead, keeping sin(el)*[cos(az), sin(az)] == (u_x, u_z).
    s = min(math.hypot(u[0], u[2]), 1.0)
    azimuth = math.atan2(u[2], u[0])
    if azimuth < 0.0:
        return azimuth + math.pi, -math.asin(s)
    return azimuth, math.asin(s)


def derive_los_angles(geometry: ArrayGeometry) -> LinkAngles:
    """LoS angles implied by the deployment geometry (pure function)."""
    bs, ris, ue = geometry.bs_position, geometry.ris_position, geometry.ue_position
    ris_bs_az, ris_bs_el = _upa_angles(_unit(ris, bs))
    ris_ue_az, ris_ue_el = _upa_angles(_unit(ris, ue))
    return LinkAngles(
        bs_ris_aod=math.asin(np.clip(_unit(bs, ris)[0], -1.0, 1.0)),
        ris_bs_azimuth=ris_bs_az,
        ris_bs_elevation=ris_bs_el,
        ris_ue_azimuth=ris_ue_az,
        ris_ue_elevation=ris_ue_el,
        ue_ris_aoa=math.asin(np.clip(_unit(ue, ris)[0], -1.0, 1.0)),
        bs_ue_aod=math.asin(np.clip(_unit(bs, ue)[0], -1.0, 1.0)),
        ue_bs_aoa=math.asin(np.clip(_unit(ue, bs)[0], -1.0, 1.0)),
    )


def random_los_angles(rng: np.random.Generator) -> LinkAngles:
    """Alternative mode: draw each angle uniformly from its domain."""
    half = np.pi / 2
    return LinkAngles(
        bs_ris_aod=rng.uniform(-half, half),
        ris_bs_azimuth=rng.uniform(0.0, np.pi),
        ris_bs_elevation=rng.uniform(-half, half),
        ris_ue_azimuth=rng.uniform(0.0, np.pi),
        ris_ue_elevation=rng.uniform(-half, half),
        ue_ris_aoa=rng.uniform(-half, half),
        bs_ue_aod=rng.uniform(-half, half),
        ue_bs_aoa=rng.uniform(-half, half),
    )


def sample_rician(los: np.ndarray, beta: float, factor: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Draw sqrt(beta) * (sqrt(F/(F+1)) * los + sqrt(1/(F+1)) * G), G ~ CN(0,1)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if not (factor >= 0 or math.isinf(factor)):
        raise ValueError("rician factor must be nonnegative")
    if math.isinf(factor):
        return np.sqrt(beta) * los
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape))
    nlos /= np.sqrt(2.0)
    w_los = np.sqrt(factor / (factor + 1.0))
    w_nlos = np.sqrt(1.0 / (factor + 1.0))
    return np.sqrt(beta) * (w_los * los + w_nlos * nlos)


def sample_channels(geometry: ArrayGeometry,
                    stats_bs_ris: LinkStatistics,
                    stats_ris_ue: LinkStatistics,
                    stats_bs_ue: LinkStatistics,
                    rng: np.random.Generator,
                    angles: LinkAngles | None = None) -> ChannelRealization:
    """Synthesize the three Rician channels for one trial.

    Pass explicit angles to override the geometric LoS derivation (used by the
    random-angles mode). Draw order is fixed (BS-RIS, RIS-UE, BS-UE) so a given
    generator state always yields the same realization.
    """
    if angles is None:
        angles = derive_los_angles(geometry)
    bs = np.asarray(geometry.bs_position, dtype=float)
    ris = np.asarray(geometry.ris_position, dtype=float)
    ue = np.asarray(geometry.ue_position, dtype=float)

    a_bs_t = ula_steering(angles.bs_ris_aod, geometry.m_t, geometry.bs_spacing)
    a_ris_t = upa_steering(angles.ris_bs_azimuth, angles.ris_bs_elevation,
                           geometry.n_x, geometry.n_y, geometry.ris_spacing)
    a_ris_r = upa_steering(angles.ris_ue_azimuth, angles.ris_ue_elevation,
                           geometry.n_x, geometry.n_y, geometry.ris_spacing)
    a_ue_r = ula_steering(angles.ue_ris_aoa, geometry.m_r, geometry.ue_spacing)
    a_bs_d = ula_steering(angles.bs_ue_aod, geometry.m_t, geometry.bs_spacing)
    a_ue_d = ula_steering(angles.ue_bs_aoa, geometry.m_r, geometry.ue_spacing)

    los_t = np.outer(a_ris_t, a_bs_t.conj())      # (N, M_t)
    los_r = np.outer(a_ue_r, a_ris_r.conj())      # (M_r, N)
    los_d = np.outer(a_ue_d, a_bs_d.conj())       # (M_r, M_t)

    beta_t = path_loss(float(np.linalg.norm(ris - bs)), stats_bs_ris)
    beta_r = path_loss(float(np.linalg.norm(ue - ris)), stats_ris_ue)
    beta_d = path_loss(float(np.linalg.norm(ue - bs)), stats_bs_ue)

    h_t = sample_rician(los_t, beta_t, stats_bs_ris.rician_factor, rng)
    h_r = sample_rician(los_r, beta_r, stats_ris_ue.rician_factor, rng)
    h_d = sample_rician(los_d, beta_d, stats_bs_ue.rician_factor, rng)

    def scaled(los, beta, factor):
        w = 1.0 if math.isinf(factor) else np.sqrt(factor / (factor + 1.0))
        return np.sqrt(beta) * w * los

    return ChannelRealization(
        h_t=h_t, h_r=h_r, h_d=h_d,
        los_t=scaled(los_t, beta_t, stats_bs_ris.rician_factor),
        los_r=scaled(los_r, beta_r, stats_ris_ue.rician_factor),
        los_d=scaled(los_d, beta_d, stats_bs_ue.rician_factor),
    )
