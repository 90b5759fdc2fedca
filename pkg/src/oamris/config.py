"""System configuration shared by every stage of the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

Point = Tuple[float, float, float]


class ConfigError(ValueError):
    """A configuration field violates one of its constraints."""

    def __init__(self, field_name: str, constraint: str):
        super().__init__(f"{field_name}: {constraint}")
        self.field = field_name
        self.constraint = constraint


def db_to_watts(db: float) -> float:
    return 10.0 ** (db / 10.0)


def watts_to_db(w: float) -> float:
    return 10.0 * math.log10(w)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one downlink scenario.

    Defaults reproduce the desk-scale setting used throughout the
    experiments: a 20-element transmit UCA, four 5-element users, a
    60-element RIS at 5 GHz.  ``streams_per_user=None`` means
    ``min(n_users, n_rx)``; ``d_y``/``d_z`` of ``None`` mean half a
    wavelength.
    """

    n_tx: int = 20
    n_users: int = 4
    n_rx: int = 5
    streams_per_user: Optional[int] = None
    m_y: int = 10
    m_z: int = 6
    r_t: float = 1.0
    r_r: float = 0.2
    wavelength: float = 0.06
    beta: float = 1.0
    d_y: Optional[float] = None
    d_z: Optional[float] = None
    p_t: float = 10.0
    sigma2: float = 1e-3
    ris_center: Point = (5.0, 2.0, 1.0)
    user_region_center: Point = (10.0, 2.0, 1.0)
    user_region_radius: float = 2.0
    seed: int = 0
    max_iters: int = 50
    eps: float = 1e-3
    # Channel the UCA-MIMO baselines precode over: "oam" = Gamma (mode
    # domain at both ends), "antenna" = F_K^H G_k Phi H (no transmit IFFT).
    baseline_domain: str = "oam"

    def __post_init__(self):
        for name in ("n_tx", "n_users", "n_rx", "m_y", "m_z", "max_iters"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.n_tx != self.n_users * self.n_rx:
            raise ConfigError(
                "n_tx", f"must equal n_users*n_rx = {self.n_users * self.n_rx}"
                f" (got {self.n_tx})")
        if self.streams_per_user is not None:
            s = self.streams_per_user
            if int(s) != s or s < 1:
                raise ConfigError("streams_per_user", "must be a positive integer")
            if s > self.n_rx:
                raise ConfigError("streams_per_user", f"must be <= n_rx = {self.n_rx}")
        for name in ("r_t", "r_r", "wavelength", "beta", "p_t", "sigma2",
                     "user_region_radius"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(name, "must be strictly positive and finite")
        for name in ("d_y", "d_z"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(name, "must be strictly positive")
        if not self.eps >= 0:
            raise ConfigError("eps", "must be non-negative")
        for name in ("ris_center", "user_region_center"):
            if len(getattr(self, name)) != 3:
                raise ConfigError(name, "must be a 3D point")
        if self.baseline_domain not in ("oam", "antenna"):
            raise ConfigError("baseline_domain", "must be 'oam' or 'antenna'")

    @property
    def n_streams(self) -> int:
        """Streams (OAM modes) per user, S."""
        if self.streams_per_user is not None:
            return self.streams_per_user
        return min(self.n_users, self.n_rx)

    @property
    def m_elements(self) -> int:
        return self.m_y * self.m_z

    @property
    def spacing_y(self) -> float:
        return self.wavelength / 2 if self.d_y is None else self.d_y

    @property
    def spacing_z(self) -> float:
        return self.wavelength / 2 if self.d_z is None else self.d_z

    @property
    def p_t_db(self) -> float:
        return watts_to_db(self.p_t)

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)
