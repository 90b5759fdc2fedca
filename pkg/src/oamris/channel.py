"""Line-of-sight channels, OAM mode matrices and the effective channel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .config import SystemConfig
from .geometry import ScenarioGeometry


@dataclass(frozen=True)
class ReflectionPattern:
    """Unit-modulus RIS reflection coefficients ``phi``."""

    phases: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=complex).ravel()
        if p.size < 1:
            raise ValueError("reflection pattern needs at least one element")
        if np.abs(np.abs(p) - 1.0).max() > 1e-12:
            raise ValueError("reflection coefficients must have unit modulus")
        object.__setattr__(self, "phases", p)

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "ReflectionPattern":
        return cls(np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=m)))

    @classmethod
    def ones(cls, m: int) -> "ReflectionPattern":
        return cls(np.ones(m, dtype=complex))

    @property
    def size(self) -> int:
        return self.phases.size

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.phases)


@dataclass(frozen=True)
class ChannelSet:
    h: np.ndarray        # (M, N_T)   transmitter -> RIS
    g: List[np.ndarray]  # K x (N_R, M)  RIS -> user k
    f_k: np.ndarray      # (N_R, S)   partial IFFT
    f: np.ndarray        # (K N_R, K S) = I_K kron F_K
    b: np.ndarray        # (K S, M)   stacked F_K^H G_k
    z: np.ndarray        # (M, K S)   H F

    @property
    def n_users(self) -> int:
        return len(self.g)

    @property
    def n_streams(self) -> int:
        return self.f_k.shape[1]

    @property
    def m_elements(self) -> int:
        return self.h.shape[0]


def los_channel(src: np.ndarray, dst: np.ndarray, wavelength: float,
                beta: float = 1.0) -> np.ndarray:
    """Free-space matrix with entry ``(i, j)`` for ``dst[i] <- src[j]``:
    ``beta * lam / (4 pi d) * exp(-j 2 pi d / lam)``."""
    src = np.atleast_2d(np.asarray(src, dtype=float))
    dst = np.atleast_2d(np.asarray(dst, dtype=float))
    if src.shape[0] == 0 or dst.shape[0] == 0:
        raise ValueError("los_channel needs non-empty position lists")
    d = np.linalg.norm(dst[:, None, :] - src[None, :, :], axis=-1)
    if (d == 0).any():
        i, j = np.argwhere(d == 0)[0]
        raise ValueError(f"coincident positions dst[{i}] and src[{j}]: "
                         "free-space model is singular at zero distance")
    return beta * wavelength / (4 * np.pi * d) * np.exp(-2j * np.pi * d / wavelength)


def oam_mode_matrix(n_rx: int, n_modes: int) -> np.ndarray:
    """``F_K`` with column k equal to ``f(k)^H``, modes ``k = 1..n_modes``."""
    if n_modes > n_rx:
        raise ValueError(f"{n_modes} modes cannot be separated by {n_rx} elements")
    n = np.arange(n_rx)[:, None]
    k = np.arange(1, n_modes + 1)[None, :]
    return np.exp(2j * np.pi * n * k / n_rx)


def assemble_links(geometry: ScenarioGeometry, config: SystemConfig) -> ChannelSet:
    lam, beta = config.wavelength, config.beta
    h = los_channel(geometry.tx_positions, geometry.ris_positions, lam, beta)
    g = [los_channel(geometry.ris_positions, pos, lam, beta)
         for pos in geometry.user_positions]
    f_k = oam_mode_matrix(config.n_rx, config.n_streams)
    f = np.kron(np.eye(len(g)), f_k)
    b = np.vstack([f_k.conj().T @ gk for gk in g])
    return ChannelSet(h=h, g=g, f_k=f_k, f=f, b=b, z=h @ f)


def cascade(b: np.ndarray, phases: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``sum_m phi_m b_m z_m^H`` evaluated as ``B diag(phi) Z``."""
    return (b * phases[None, :]) @ z


def effective_channel(channels: ChannelSet, pattern: ReflectionPattern) -> np.ndarray:
    if pattern.size != channels.m_elements:
        raise ValueError(f"pattern has {pattern.size} elements, "
                         f"channel expects {channels.m_elements}")
    return cascade(channels.b, pattern.phases, channels.z)


def antenna_channel(channels: ChannelSet, pattern: ReflectionPattern) -> np.ndarray:
    """Stacked ``F_K^H G_k Phi H`` (transmit side left in antenna domain)."""
    return cascade(channels.b, pattern.phases, channels.h)


def user_block(gamma: np.ndarray, k: int, n_streams: int) -> np.ndarray:
    return gamma[k * n_streams:(k + 1) * n_streams]
