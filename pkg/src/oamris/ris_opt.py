"""Element-wise closed-form RIS phase updates and the alternating loop.

With the precoder fixed, the capacity ``log2 det(I + A A^H / sigma2)``
(``A = B diag(phi) Zbar``, ``Zbar = Z U_R Sigma_R^{1/2}``) restricted to a
single coefficient ``phi_m`` is ``log2 det(J_m + phi_m O_m + conj(phi_m) O_m^H)``
with ``O_m`` of rank one, so the best unit-modulus ``phi_m`` is
``exp(-j arg eps_m)`` where ``eps_m`` is the non-zero eigenvalue of
``J_m^{-1} O_m``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from .channel import ChannelSet, ReflectionPattern, cascade
from .config import SystemConfig
from .metrics import per_stream_sinr, sum_rate
from .numerics import arg, hermitian_psd_root, log2det_eye_plus_gram, rank_one_eigenvalue
from .precoder import PrecoderStack, baseline_precoder, three_layer_precoder

log = logging.getLogger(__name__)

PRECODER_KINDS = ("three-layer", "mrt", "zf", "mmse")


@dataclass
class RisWorkspace:
    """Mutable state of one sweep.  Confined to a single thread."""

    z_bar: np.ndarray      # (M, n) rows z'_m^H
    phases: np.ndarray     # current phi, updated in place
    a_current: np.ndarray  # running sum_i phi_i b_i z'_i^H

    @classmethod
    def build(cls, b: np.ndarray, z: np.ndarray, w: np.ndarray,
              pattern: ReflectionPattern) -> "RisWorkspace":
        z_bar = z @ covariance_root(w)
        phases = pattern.phases.copy()
        return cls(z_bar=z_bar, phases=phases, a_current=cascade(b, phases, z_bar))


@dataclass
class ConvergenceTrace:
    values: List[float] = field(default_factory=list)
    status: str = "max-iters"
    initial_value: Optional[float] = None

    @property
    def iterations(self) -> int:
        return len(self.values)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class BaselineDesign:
    kind: str
    w: np.ndarray


def covariance_root(w: np.ndarray) -> np.ndarray:
    """``U_R Sigma_R^{1/2}`` for ``R = W W^H``."""
    return hermitian_psd_root(w @ w.conj().T)


def capacity_objective(b: np.ndarray, phases: np.ndarray, z_bar: np.ndarray,
                       sigma2: float) -> float:
    return log2det_eye_plus_gram(cascade(b, phases, z_bar), 1.0 / sigma2)


def element_terms(m: int, a_m: np.ndarray, b: np.ndarray, z_bar: np.ndarray,
                  sigma2: float):
    """``(J_m, u, v)`` with ``O_m = u v^H``, given ``A_m`` (element m removed)."""
    bm = b[:, m]
    zm = z_bar[m].conj()          # z'_m as a column
    n = b.shape[0]
    j = (np.eye(n, dtype=complex)
         + (a_m @ a_m.conj().T + np.vdot(zm, zm).real * np.outer(bm, bm.conj())) / sigma2)
    u = bm / sigma2
    v = a_m @ zm
    return j, u, v


def element_matrices(m, a_m, b, z_bar, sigma2):
    """Explicit ``(J_m, O_m)``; only used for checks and diagnostics."""
    j, u, v = element_terms(m, a_m, b, z_bar, sigma2)
    return j, np.outer(u, v.conj())


def element_update(m: int, workspace: RisWorkspace, b: np.ndarray,
                   sigma2: float) -> complex:
    """Best unit-modulus ``phi_m`` with all other coefficients fixed.

    ``workspace.a_current`` must exclude element ``m``'s contribution.
    The previous coefficient is kept when ``eps_m`` vanishes.
    """
    j, u, v = element_terms(m, workspace.a_current, b, workspace.z_bar, sigma2)
    return best_phase(j, u, v, previous=complex(workspace.phases[m]))


def best_phase(j: np.ndarray, u: np.ndarray, v: np.ndarray,
               previous: complex = 1.0) -> complex:
    """Maximizer of ``log det(J + phi u v^H + conj(phi) v u^H)`` on ``|phi| = 1``."""
    eps = rank_one_eigenvalue(j, u, v)
    if eps == 0:
        return complex(previous)
    return complex(np.exp(-1j * arg(eps)))


def element_objective(j: np.ndarray, o: np.ndarray, phi) -> np.ndarray:
    """``log2 det(J + phi O + conj(phi) O^H)``, vectorized over ``phi``."""
    phi = np.asarray(phi, dtype=complex)
    mats = (j[None] + phi.reshape(-1, 1, 1) * o[None]
            + phi.conj().reshape(-1, 1, 1) * o.conj().T[None])
    sign, logdet = np.linalg.slogdet(mats)
    out = logdet / np.log(2.0)
    return out.reshape(phi.shape)


def sweep(pattern: ReflectionPattern, workspace: RisWorkspace, b: np.ndarray,
          sigma2: float) -> ReflectionPattern:
    """One ascending pass of ``element_update`` over all elements."""
    if not np.array_equal(pattern.phases, workspace.phases):
        raise ValueError("workspace is not consistent with the pattern")
    z_bar, phases, a = workspace.z_bar, workspace.phases, workspace.a_current
    for m in range(phases.size):
        a -= phases[m] * np.outer(b[:, m], z_bar[m])
        new = element_update(m, workspace, b, sigma2)
        phases[m] = new
        a += new * np.outer(b[:, m], z_bar[m])
    # keep |phi| == 1 exactly despite round-off in exp()
    return ReflectionPattern(phases / np.abs(phases))


def _precoder_step(kind: str, config: SystemConfig, channels: ChannelSet,
                   phases: np.ndarray):
    """Build the precoder for the current pattern; return (design, channel, z)."""
    gamma = cascade(channels.b, phases, channels.z)
    if kind == "three-layer":
        stack = three_layer_precoder(gamma, channels.n_users, channels.n_streams,
                                     config.sigma2, config.p_t)
        return stack, gamma, channels.z
    if config.baseline_domain == "antenna":
        h_eff, z = cascade(channels.b, phases, channels.h), channels.h
    else:
        h_eff, z = gamma, channels.z
    w = baseline_precoder(kind, h_eff, config.p_t, config.sigma2)
    return BaselineDesign(kind, w), h_eff, z


def _rate(design, h_eff, sigma2) -> float:
    return sum_rate(per_stream_sinr(h_eff, design.w, sigma2))


def alternate(config: SystemConfig, channels: ChannelSet,
              initial_pattern: ReflectionPattern, precoder: str = "three-layer",
              max_iters: Optional[int] = None, eps: Optional[float] = None):
    """Alternate precoder design and RIS sweeps.

    Iteration ``i`` sweeps the RIS under the precoder of iteration
    ``i-1`` and rebuilds the precoder for the new pattern; the recorded
    value is the sum rate of that consistent (precoder, pattern) pair,
    and the rebuilt precoder seeds the next sweep.  Stops once the gain
    over the previous iteration is at most ``eps`` or after
    ``max_iters`` sweeps.

    Returns ``(design, pattern, trace)`` where ``design`` is a
    :class:`PrecoderStack` for the three-layer precoder and a
    :class:`BaselineDesign` otherwise.
    """
    if precoder not in PRECODER_KINDS:
        raise ValueError(f"unknown precoder {precoder!r}")
    max_iters = config.max_iters if max_iters is None else max_iters
    eps = config.eps if eps is None else eps
    pattern = initial_pattern
    design, h_eff, z = _precoder_step(precoder, config, channels, pattern.phases)
    trace = ConvergenceTrace(initial_value=_rate(design, h_eff, config.sigma2))
    for i in range(1, max_iters + 1):
        ws = RisWorkspace.build(channels.b, z, design.w, pattern)
        pattern = sweep(pattern, ws, channels.b, config.sigma2)
        design, h_eff, z = _precoder_step(precoder, config, channels, pattern.phases)
        value = _rate(design, h_eff, config.sigma2)
        trace.values.append(value)
        if i > 1 and value - trace.values[-2] <= eps:
            trace.status = "converged"
            break
    log.debug("%s alternation: %d iterations, %s", precoder, trace.iterations, trace.status)
    return design, pattern, trace
