"""Dense real-matrix primitives shared by the rest of the package.

Everything here is a pure function of its inputs. LAPACK (through scipy)
does the heavy lifting; this module adds the normalisation conventions and
the error reporting the callers rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack


class LinalgError(RuntimeError):
    pass


class EigenSolverError(LinalgError):
    def __init__(self, message: str, info: int | None = None):
        super().__init__(message)
        self.info = info


class SingularShiftError(LinalgError):
    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with optional biorthogonal right/left eigenvectors.

    ``right`` has unit 2-norm and ``left`` is scaled so that
    ``left.conj() @ right == 1``. ``ill_conditioned`` marks eigenvalues that
    sit within the clustering tolerance of another one; their individual
    vectors are not trustworthy.
    """

    value: complex
    right: np.ndarray | None = None
    left: np.ndarray | None = None
    ill_conditioned: bool = False


def as_dense(M, *, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a real square matrix (fast path, no vectors)."""
    A = as_dense(M)
    _require_square(A)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        return sla.eigvals(A, check_finite=False, overwrite_a=False).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"QR iteration failed to converge: {exc}") from exc


def eig_general(M, want_vectors: bool = False, cluster_tol: float = 1e-10) -> list[EigenPair]:
    """Eigen-decomposition of a real square matrix.

    Eigenvalues whose distance to another eigenvalue is below
    ``cluster_tol * ||M||_op`` are flagged ``ill_conditioned`` when vectors
    are requested.
    """
    A = as_dense(M)
    _require_square(A)
    n = A.shape[0]
    if n == 0:
        return []
    if not want_vectors:
        return [EigenPair(complex(w)) for w in eigenvalues(A)]

    try:
        w, vl, vr = sla.eig(A, left=True, right=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"QR iteration failed to converge: {exc}") from exc

    scale = svd_values(A)[0] if n else 0.0
    gaps = _nearest_gaps(w)
    pairs = []
    for i in range(n):
        r = vr[:, i].astype(complex)
        r = r / np.linalg.norm(r)
        l = vl[:, i].astype(complex)
        overlap = np.vdot(l, r)
        ill = bool(gaps[i] < cluster_tol * max(scale, np.finfo(float).tiny))
        if abs(overlap) < 1e-14:
            ill = True
        else:
            l = l / np.conj(overlap)
        pairs.append(EigenPair(complex(w[i]), r, l, ill))
    return pairs


def _nearest_gaps(w: np.ndarray) -> np.ndarray:
    if w.size < 2:
        return np.full(w.size, np.inf)
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def svd_values(M) -> np.ndarray:
    A = as_dense(M)
    if A.size == 0:
        return np.zeros(0)
    return sla.svdvals(A, check_finite=False)


def op_norm(M, tol: float = 1e-12, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``M.T @ M``.

    The start vector is all ones plus a tiny seeded perturbation, so a
    start orthogonal to the top singular vector is practically impossible.
    """
    A = as_dense(M)
    if A.size == 0 or not np.any(A):
        return 0.0
    rng = np.random.default_rng(seed)
    x = np.ones(A.shape[1]) + 1e-6 * rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = A @ x
        new = float(np.linalg.norm(y))
        z = A.T @ y
        nz = np.linalg.norm(z)
        if nz == 0.0:
            # x landed in the null space; nudge and continue
            x = rng.standard_normal(A.shape[1])
            x /= np.linalg.norm(x)
            continue
        x = z / nz
        if est > 0.0 and abs(new - est) <= tol * new:
            est = new
            break
        est = new
    # one Rayleigh step on the final iterate
    return float(max(est, np.linalg.norm(A @ x)))


def solve_shifted(M, z: complex, B, cond_cap: float = 1e12, tol: float = 1e-8) -> np.ndarray:
    """Return ``(M - z I)^{-1} B``.

    The 1-norm condition number is estimated from the LU factors (LAPACK
    ``gecon``); shifts with an estimate above ``cond_cap`` raise
    :class:`SingularShiftError`.
    """
    A = as_dense(M)
    _require_square(A)
    Bm = np.asarray(B)
    if Bm.ndim == 1:
        Bm = Bm[:, None]
    if Bm.shape[0] != A.shape[0]:
        raise ValueError(f"right-hand side has {Bm.shape[0]} rows, matrix has {A.shape[0]}")
    shifted = A.astype(complex) - complex(z) * np.eye(A.shape[0])
    anorm = np.abs(shifted).sum(axis=0).max()
    lu, piv, info = lapack.zgetrf(shifted)
    if info > 0:
        raise SingularShiftError(f"M - zI is exactly singular at z={z}", np.inf)
    rcond, _ = lapack.zgecon(lu, anorm)
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond > cond_cap:
        raise SingularShiftError(f"M - zI is near-singular at z={z} (cond ~ {cond:.3e})", cond)
    X, info = lapack.zgetrs(lu, piv, Bm.astype(complex))
    if info != 0:
        raise LinalgError(f"zgetrs failed with info={info}")
    # backward-error style residual; LU with partial pivoting keeps this near eps
    resid = np.linalg.norm(shifted @ X - Bm) / (
        np.linalg.norm(shifted) * np.linalg.norm(X) + np.linalg.norm(Bm)
    )
    if resid > tol:
        raise LinalgError(f"shifted solve residual {resid:.3e} exceeds tolerance")
    return X
