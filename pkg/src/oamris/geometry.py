"""Antenna element positions for the transmit UCA, user UCAs and the RIS."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .config import SystemConfig


@dataclass(frozen=True)
class UserPose:
    center: np.ndarray
    theta_x: float
    theta_y: float

    def __post_init__(self):
        for name in ("theta_x", "theta_y"):
            v = getattr(self, name)
            if not 0.0 <= v <= np.pi / 2:
                raise ValueError(f"{name}={v} outside [0, pi/2]")

    @property
    def deflection(self) -> float:
        return deflection_angle(self.theta_x, self.theta_y)


@dataclass(frozen=True)
class ScenarioGeometry:
    tx_positions: np.ndarray          # (N_T, 3)
    user_positions: List[np.ndarray]  # K arrays of shape (N_R, 3)
    ris_positions: np.ndarray         # (M, 3)
    poses: List[UserPose]

    @property
    def deflections(self) -> List[float]:
        return [p.deflection for p in self.poses]


def transmit_uca_positions(n_tx: int, r_t: float) -> np.ndarray:
    if n_tx < 1 or not r_t > 0:
        raise ValueError("need n_tx >= 1 and r_t > 0")
    ang = 2 * np.pi * np.arange(n_tx) / n_tx
    return np.stack([r_t * np.cos(ang), r_t * np.sin(ang), np.zeros(n_tx)], axis=1)


def _receiver_axes(theta_x: float, theta_y: float):
    normal = np.array([np.tan(theta_x), np.tan(theta_y), 1.0])
    b = np.cross(normal, [1.0, 0.0, 0.0])
    c = np.cross(normal, b)
    return b / np.linalg.norm(b), c / np.linalg.norm(c)


def receiver_uca_positions(pose: UserPose, n_rx: int, r_r: float) -> np.ndarray:
    """Element ``l`` sits at ``center - R cos(phi_l) b_hat + R sin(phi_l) c_hat``
    where ``b = n x e_x``, ``c = n x b`` and ``n = (tan tx, tan ty, 1)``.
    """
    if pose.theta_x >= np.pi / 2 or pose.theta_y >= np.pi / 2:
        raise ValueError("deflection angle of pi/2 makes the UCA normal singular")
    if n_rx < 1 or not r_r > 0:
        raise ValueError("need n_rx >= 1 and r_r > 0")
    b_hat, c_hat = _receiver_axes(pose.theta_x, pose.theta_y)
    ang = 2 * np.pi * np.arange(n_rx) / n_rx
    center = np.asarray(pose.center, dtype=float)
    return (center[None, :]
            - r_r * np.cos(ang)[:, None] * b_hat[None, :]
            + r_r * np.sin(ang)[:, None] * c_hat[None, :])


def deflection_angle(theta_x: float, theta_y: float) -> float:
    return float(np.arctan(np.sqrt(np.tan(theta_x) ** 2 + np.tan(theta_y) ** 2)))


def ris_upa_positions(center: Sequence[float], m_y: int, m_z: int,
                      d_y: float, d_z: float) -> np.ndarray:
    """RIS element coordinates in the plane ``x = center_x``.

    Element ``m = i_y * m_z + i_z`` (z index fastest).
    """
    if m_y < 1 or m_z < 1 or not (d_y > 0 and d_z > 0):
        raise ValueError("need m_y, m_z >= 1 and positive spacings")
    iy = np.repeat(np.arange(m_y), m_z)
    iz = np.tile(np.arange(m_z), m_y)
    offsets = np.stack([np.zeros(m_y * m_z),
                        d_y * (iy + (1 - m_y) / 2),
                        d_z * (iz + (1 - m_z) / 2)], axis=1)
    return np.asarray(center, dtype=float)[None, :] + offsets


def sample_user_poses(config: SystemConfig, rng: np.random.Generator) -> List[UserPose]:
    """Users uniform in a ball (rejection from the bounding cube) with
    deflection angles uniform on [0, pi/4]."""
    radius = config.user_region_radius
    center = np.asarray(config.user_region_center, dtype=float)
    poses = []
    for _ in range(config.n_users):
        while True:
            offset = rng.uniform(-radius, radius, size=3)
            if offset @ offset <= radius * radius:
                break
        tx, ty = rng.uniform(0.0, np.pi / 4, size=2)
        poses.append(UserPose(center=center + offset, theta_x=float(tx), theta_y=float(ty)))
    return poses


def build_geometry(config: SystemConfig, poses: List[UserPose]) -> ScenarioGeometry:
    return ScenarioGeometry(
        tx_positions=transmit_uca_positions(config.n_tx, config.r_t),
        user_positions=[receiver_uca_positions(p, config.n_rx, config.r_r) for p in poses],
        ris_positions=ris_upa_positions(config.ris_center, config.m_y, config.m_z,
                                        config.spacing_y, config.spacing_z),
        poses=list(poses),
    )


def sample_geometry(config: SystemConfig, rng: np.random.Generator) -> ScenarioGeometry:
    return build_geometry(config, sample_user_poses(config, rng))
