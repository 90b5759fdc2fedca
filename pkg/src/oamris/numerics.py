"""Dense complex linear algebra shared by the rest of the package.

Every numerically delicate choice (rank threshold, phase convention of
``arg``, factorization used for Hermitian solves) lives here so the
modules that build channels and precoders never call LAPACK directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

# Singular values below RANK_RTOL * s_max count as zero.
RANK_RTOL = 1e-9


class NonFiniteError(ValueError):
    """Raised when a matrix contains NaN or Inf entries."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization fails."""


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return self.vh.conj().T


def check_finite(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    bad = ~np.isfinite(a)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NonFiniteError(f"{name} has a non-finite entry at index {idx}")
    return a


def svd_full(a: np.ndarray) -> SvdResult:
    """Full SVD ``a = U diag(s) V^H`` with V square, so its trailing
    columns span the null space of ``a``.
    """
    a = check_finite(np.atleast_2d(a))
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError("svd_full needs at least one row and one column")
    u, s, vh = np.linalg.svd(a.astype(complex), full_matrices=True)
    return SvdResult(u=u, s=s, vh=vh)


def numerical_rank(s: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.asarray(s)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def solve_hermitian(j: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``J X = B`` for Hermitian positive-definite ``J`` via Cholesky."""
    j = check_finite(np.atleast_2d(j), "j")
    b = check_finite(np.asarray(b), "b")
    scale = max(np.abs(j).max(), 1e-300)
    if np.abs(j - j.conj().T).max() > 1e-8 * scale:
        raise ValueError("solve_hermitian: matrix is not Hermitian to 1e-8")
    try:
        factor = sla.cho_factor(j, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            f"Cholesky factorization failed: {exc}") from exc
    return sla.cho_solve(factor, b, check_finite=False)


def rank_one_eigenvalue(j: np.ndarray, u: np.ndarray, v: np.ndarray) -> complex:
    """The only non-zero eigenvalue of ``J^{-1} u v^H``, i.e. ``v^H J^{-1} u``.

    Returns exactly 0 when ``u`` or ``v`` is the zero vector.
    """
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape or j.shape != (u.size, u.size):
        raise ValueError(
            f"dimension mismatch: j{j.shape}, u{u.shape}, v{v.shape}")
    if not u.any() or not v.any():
        return 0j
    x = solve_hermitian(j, u)
    return complex(np.vdot(v, x))


def arg(z: complex) -> float:
    """Phase in (-pi, pi]; ``arg(0) == 0``."""
    if z == 0:
        return 0.0
    a = float(np.angle(z))
    return np.pi if a == -np.pi else a


def hermitian_psd_root(r: np.ndarray) -> np.ndarray:
    """Return ``U sqrt(L)`` from the eigendecomposition of PSD ``r``,
    clamping round-off negative eigenvalues at zero."""
    r = check_finite(np.atleast_2d(r), "r")
    r = 0.5 * (r + r.conj().T)
    evals, evecs = np.linalg.eigh(r)
    evals = np.clip(evals, 0.0, None)
    return evecs * np.sqrt(evals)[None, :]


def log2det_eye_plus_gram(a: np.ndarray, scale: float = 1.0) -> float:
    """``log2 det(I + scale * A A^H)`` from the singular values of ``A``.

    Uses log1p so tiny SNRs keep full relative precision.
    """
    a = np.atleast_2d(a)
    if a.size == 0:
        return 0.0
    s = np.linalg.svd(a, compute_uv=False)
    return float(np.sum(np.log1p(scale * s**2)) / np.log(2.0))


def log2det_hpd(m: np.ndarray) -> float:
    """``log2 det`` of a Hermitian positive-definite matrix via Cholesky."""
    m = 0.5 * (m + m.conj().T)
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    return float(2.0 * np.sum(np.log(np.abs(np.diag(c)))) / np.log(2.0))
