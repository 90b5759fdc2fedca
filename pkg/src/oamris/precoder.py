"""Three-layer precoder ``W = Q D E`` and the MRT/ZF/MMSE baselines.

``Q`` projects each user's streams onto the null space of every other
user's channel, ``D`` diagonalizes what is left of each user's own
channel, and ``E`` distributes the power budget by water-filling over
the resulting parallel eigenchannels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .numerics import numerical_rank, svd_full

# Gamma_k Q_k with a larger condition number is treated as a degenerate draw.
MAX_EQUALIZER_COND = 1e8


class InsufficientNullSpaceError(np.linalg.LinAlgError):
    def __init__(self, k: int, rank: int, needed: int, dim: int):
        super().__init__(
            f"user {k}: interference channel has numerical rank {rank}, "
            f"leaving {dim - rank} null-space dimensions but {needed} are needed")
        self.rank = rank


class DegenerateScenarioError(np.linalg.LinAlgError):
    """Gamma_k Q_k is (numerically) singular for this geometry draw."""

    def __init__(self, k: int, cond: float):
        super().__init__(f"user {k}: Gamma_k Q_k condition number {cond:.3e} "
                         f">= {MAX_EQUALIZER_COND:.0e}")
        self.user = k
        self.cond = cond


class RankDeficientWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PrecoderStack:
    q_blocks: List[np.ndarray]
    d_blocks: List[np.ndarray]
    sigma_tilde: List[np.ndarray]  # singular values lambda_{k,i}, one array per user
    e_powers: np.ndarray           # water-filled powers, flattened (k, i)
    w: np.ndarray
    scale: float = 1.0             # global budget rescaling applied to W

    @property
    def gains(self) -> np.ndarray:
        return np.concatenate(self.sigma_tilde)

    def w_block(self, k: int) -> np.ndarray:
        s = self.q_blocks[k].shape[1]
        return self.w[:, k * s:(k + 1) * s]


def _fix_column_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is real positive."""
    v = v.copy()
    for c in range(v.shape[1]):
        col = v[:, c]
        mag = np.abs(col)
        idx = int(np.argmax(mag > 1e-12 * mag.max()))
        v[:, c] = col * np.exp(-1j * np.angle(col[idx]))
    return v


def interuser_nullspace(gamma: np.ndarray, k: int, n_streams: int) -> np.ndarray:
    """Orthonormal ``Q_k`` with ``Gamma_i Q_k = 0`` for every ``i != k``.

    Takes the last ``n_streams`` right singular vectors of the channel
    stacked from all users but ``k``.
    """
    rows = np.arange(gamma.shape[0])
    others = np.delete(rows, np.s_[k * n_streams:(k + 1) * n_streams])
    res = svd_full(gamma[others])
    rank = numerical_rank(res.s)
    dim = gamma.shape[1]
    if dim - rank < n_streams:
        raise InsufficientNullSpaceError(k, rank, n_streams, dim)
    return _fix_column_phases(res.v[:, dim - n_streams:])


def intermode_equalizer(gamma_k: np.ndarray, q_k: np.ndarray,
                        k: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """``D_k = (Gamma_k Q_k)^{-1} Sigma_k`` so that ``Gamma_k Q_k D_k = Sigma_k``.

    Returns ``(D_k, s)`` where ``s`` are the singular values of ``Gamma_k Q_k``.
    """
    a = gamma_k @ q_k
    s = np.linalg.svd(a, compute_uv=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if not cond < MAX_EQUALIZER_COND:
        raise DegenerateScenarioError(k, cond)
    return np.linalg.solve(a, np.diag(s).astype(complex)), s


def waterfill(gains: np.ndarray, sigma2: float, p_t: float) -> np.ndarray:
    """Water-filling powers ``p_i = max(0, mu - sigma2 / gains_i**2)``
    with ``sum(p) == p_t``.

    The active set is found from the sorted noise-to-gain levels and the
    powers are then formed from level differences, which avoids the
    cancellation ``mu - n_i`` suffers when both are huge compared to
    ``p_t``.
    """
    gains = np.asarray(gains, dtype=float)
    if (gains < 0).any():
        raise ValueError("gains must be non-negative")
    if not p_t > 0:
        raise ValueError("p_t must be positive")
    usable = gains > 0
    if not usable.any():
        raise ValueError("all gains are zero: no usable channel")
    levels = np.full(gains.shape, np.inf)
    levels[usable] = sigma2 / gains[usable] ** 2
    order = np.argsort(levels, kind="stable")
    srt = levels[order][: int(usable.sum())]
    # n streams active iff the weakest of them still sits below the water
    n_active = 1
    for n in range(2, srt.size + 1):
        if np.sum(srt[n - 1] - srt[:n]) < p_t:
            n_active = n
        else:
            break
    act = srt[:n_active]
    p_sorted = (p_t + np.sum(act[None, :] - act[:, None], axis=1)) / n_active
    powers = np.zeros_like(gains)
    powers[order[:n_active]] = np.clip(p_sorted, 0.0, None)
    return powers


def compose_precoder(q_blocks, d_blocks, sigma_tilde, powers, p_t) -> PrecoderStack:
    """``W_k = Q_k D_k diag(sqrt(p_k))``, rescaled only if over budget."""
    s = q_blocks[0].shape[1]
    blocks = []
    for k, (q, d) in enumerate(zip(q_blocks, d_blocks)):
        e_k = np.sqrt(powers[k * s:(k + 1) * s])
        blocks.append(q @ d * e_k[None, :])
    w = np.hstack(blocks)
    total = float(np.sum(np.abs(w) ** 2))
    scale = 1.0 if total <= p_t else float(np.sqrt(p_t / total))
    return PrecoderStack(q_blocks=list(q_blocks), d_blocks=list(d_blocks),
                         sigma_tilde=list(sigma_tilde), e_powers=np.asarray(powers),
                         w=w * scale, scale=scale)


def three_layer_precoder(gamma: np.ndarray, n_users: int, n_streams: int,
                         sigma2: float, p_t: float) -> PrecoderStack:
    q_blocks, d_blocks, sig = [], [], []
    for k in range(n_users):
        q = interuser_nullspace(gamma, k, n_streams)
        d, s = intermode_equalizer(gamma[k * n_streams:(k + 1) * n_streams], q, k)
        q_blocks.append(q)
        d_blocks.append(d)
        sig.append(s)
    powers = waterfill(np.concatenate(sig), sigma2, p_t)
    return compose_precoder(q_blocks, d_blocks, sig, powers, p_t)


def _scale_to_budget(w: np.ndarray, p_t: float) -> np.ndarray:
    norm2 = float(np.sum(np.abs(w) ** 2))
    if norm2 == 0:
        return w
    return w * np.sqrt(p_t / norm2)


def baseline_precoder(kind: str, h_eff: np.ndarray, p_t: float,
                      sigma2: float) -> np.ndarray:
    """Linear MRT / ZF / MMSE precoder for the stacked channel ``h_eff``
    (streams x transmit dimensions), scaled to use exactly ``p_t``.

    ZF and MMSE are formed from the SVD of ``h_eff`` rather than by
    inverting the Gram matrix, which squares the condition number.
    """
    n_streams = h_eff.shape[0]
    if kind == "mrt":
        w = h_eff.conj().T
    elif kind in ("zf", "mmse"):
        u, s, vh = np.linalg.svd(h_eff, full_matrices=False)
        if kind == "zf":
            r = numerical_rank(s)
            if r < n_streams:
                warnings.warn(f"ZF on rank-deficient channel (rank {r} < {n_streams});"
                              " using a truncated pseudo-inverse", RankDeficientWarning,
                              stacklevel=2)
            inv = np.zeros_like(s)
            inv[:r] = 1.0 / s[:r]
        else:
            alpha = sigma2 * n_streams / p_t
            inv = s / (s**2 + alpha)
        w = (vh.conj().T * inv[None, :]) @ u.conj().T
    else:
        raise ValueError(f"unknown baseline precoder {kind!r}")
    return _scale_to_budget(w, p_t)
