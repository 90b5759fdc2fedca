"""SINR, sum rate and log-det capacity for a (channel, precoder) pair.

No noise realizations are drawn; everything is evaluated analytically
from the noise power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import log2det_eye_plus_gram

LN2 = np.log(2.0)


@dataclass(frozen=True)
class RateReport:
    per_stream_sinr: np.ndarray  # (K, S), linear
    per_user_rate: np.ndarray    # (K,), bits/s/Hz
    sum_rate: float
    logdet_capacity: float


def per_stream_sinr(gamma: np.ndarray, w: np.ndarray, sigma2: float,
                    n_users: int | None = None) -> np.ndarray:
    """SINR of each stream with all other streams treated as noise.

    Row ``r`` of ``T = Gamma W`` is what stream ``r``'s detector sees;
    the diagonal entry is the signal and the rest of the row interferes.
    Returned with shape ``(n_users, S)`` when ``n_users`` is given.
    """
    t2 = np.abs(gamma @ w) ** 2
    signal = np.diag(t2).copy()
    np.fill_diagonal(t2, 0.0)
    sinr = signal / (t2.sum(axis=1) + sigma2)
    if n_users is not None:
        sinr = sinr.reshape(n_users, -1)
    return sinr


def sum_rate(sinr: np.ndarray) -> float:
    return float(np.sum(np.log1p(np.asarray(sinr))) / LN2)


def logdet_capacity(gamma: np.ndarray, w: np.ndarray, sigma2: float) -> float:
    """``log2 det(I + Gamma W W^H Gamma^H / sigma2)``."""
    return log2det_eye_plus_gram(gamma @ w, 1.0 / sigma2)


def rate_report(gamma: np.ndarray, w: np.ndarray, sigma2: float,
                n_users: int) -> RateReport:
    sinr = per_stream_sinr(gamma, w, sigma2, n_users)
    per_user = np.log1p(sinr).sum(axis=1) / LN2
    return RateReport(per_stream_sinr=sinr, per_user_rate=per_user,
                      sum_rate=float(per_user.sum()),
                      logdet_capacity=logdet_capacity(gamma, w, sigma2))
