"""Covariances of resolvent quadratic forms and the outlier fluctuation variance.

All kernels are built from the p x p matrix K_p = [I - T T^T / s]^{-1} with
s = n^2 |z|^2. The n-side kernel follows by push-through,

    [I - T^T T / s]^{-1} = I + T^T K_p T / s,

so only one small factorization is needed per (T, z). Rank-one profiles skip
the factorization entirely (Sherman-Morrison).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as sla

from ..model import SigmaSpec, VarianceProfile
from .limits import TheoryError, threshold


class KernelSingularError(TheoryError):
    pass


class _Kernel:
    """Applies K_p = [I - T T^T / s]^{-1} and the derived bilinear forms."""

    def __init__(self, T: VarianceProfile, n: int, z_abs: float, fast: bool = True):
        self.T = T.T
        self.n = n
        self.s = (n * z_abs) ** 2
        rho = T.op_norm() ** 2 / self.s
        if not rho < 1.0:
            raise KernelSingularError(
                f"kernel is singular: ||T||^2 / (n^2 |z|^2) = {rho:.4g} >= 1 (z inside the bulk)")
        self.factors = T.rank_one_factors() if fast else None
        if self.factors is None:
            p = self.T.shape[0]
            self._cho = sla.cho_factor(np.eye(p) - (self.T @ self.T.T) / self.s)

    def Kp(self, w: np.ndarray) -> np.ndarray:
        if self.factors is not None:
            a, b = self.factors
            nb2 = b @ b
            return w + a * (nb2 * (a @ w) / (self.s - nb2 * (a @ a)))
        return sla.cho_solve(self._cho, w)

    def TKnT(self, w: np.ndarray, w2: np.ndarray) -> float:
        """w^T T K_n T^T w2 for p-vectors w, w2."""
        x, y = self.T.T @ w, self.T.T @ w2
        return float(x @ y + (self.T @ x) @ self.Kp(self.T @ y) / self.s)

    def TtKpT(self, w: np.ndarray, w2: np.ndarray) -> float:
        """w^T T^T K_p T w2 for n-vectors w, w2."""
        return float((self.T @ w) @ self.Kp(self.T @ w2))

    def N(self, w: np.ndarray, w2: np.ndarray) -> float:
        """w^T (T T^T K_p T) w2 for a p-vector w and an n-vector w2."""
        return float((self.T.T @ w) @ (self.T.T @ self.Kp(self.T @ w2)))


def qf_covariance(T: VarianceProfile, n: int | None, z_abs: float,
                  kind: Literal["A", "B", "C", "D"], vectors, fast: bool = True) -> float:
    """Limiting covariance of two sqrt(n)-scaled resolvent quadratic forms.

    ``vectors = (x_i, y_i, x_j, y_j)``. Slots: A takes p-vectors on both
    sides, B n-vectors on both sides, C and D a p-vector then an n-vector.
    """
    p, nn = T.shape
    n = nn if n is None else int(n)
    xi, yi, xj, yj = (np.asarray(v, dtype=float).ravel() for v in vectors)
    want = {"A": (p, p), "B": (nn, nn), "C": (p, nn), "D": (p, nn)}
    if kind not in want:
        raise TheoryError(f"unknown kind {kind!r}")
    lx, ly = want[kind]
    if xi.size != lx or xj.size != lx or yi.size != ly or yj.size != ly:
        raise TheoryError(f"kind {kind} needs vectors of lengths ({lx}, {ly})")
    K = _Kernel(T, n, z_abs, fast)
    w, w2 = xi * xj, yi * yj
    z4 = z_abs ** 4
    if kind == "A":
        return K.TKnT(w, w2) / (n * z4)
    if kind == "B":
        return K.TtKpT(w, w2) / (n * z4)
    return K.N(w, w2) / (n * n * z4)


@dataclass(frozen=True)
class FluctuationSpec:
    var_g: float
    var_linear: float
    var_total: float
    z_abs_used: float
    terms: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def var_total_normalized(self) -> float:
        """Variance of lambda_i - d_i for the eigenvalue of the linearization.

        The outlier eigenvector of the linearization is w = (u; v)/sqrt 2, so
        the linear term is w^T X w = (u^T S X1 v + v^T X2^T S^T u) / 2 and the
        Gaussian part carries the same factor. Both variances pick up 1/4.
        Monte Carlo agrees with this value, not with ``var_total``.
        """
        return self.var_total / 4.0


def fluct_variance(T: VarianceProfile, n: int | None, sigma: SigmaSpec, u, v, d: float,
                   other_d=(), min_separation: float = 0.05, fast: bool = True) -> FluctuationSpec:
    """Variance prediction for the outlier near d, as a three-term kernel sum.

    The resolvents are evaluated at d^2, so |z| = d^2 in every kernel. The
    third term reads M(T^*, a, b) as the column-of-T form with the T T^T
    kernel, the only reading with matching dimensions.
    """
    p, nn = T.shape
    n = nn if n is None else int(n)
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.size != p or v.size != nn:
        raise TheoryError(f"u, v must have lengths {p}, {nn}")
    thr = threshold(T, n)
    if not d > thr:
        raise TheoryError(f"d = {d} is not above the threshold {thr:.5f}")
    for o in other_d:
        if o != d and abs(o - d) < min_separation:
            raise TheoryError(f"signal strengths {d} and {o} are closer than {min_separation}")

    z_abs = d * d
    K = _Kernel(T, n, z_abs, fast)
    s = sigma.apply_transpose(u)
    sq, vq = s * s, v * v
    t1 = d * d / n**2 * K.TKnT(sq, sq)
    t2 = 2.0 / n**3 * K.N(sq, vq)
    t3 = d * d / n**2 * K.TtKpT(vq, vq)
    pref = n / d**4
    var_g = pref * (t1 + t2 + t3)
    var_linear = 2.0 * float(sq @ T.T @ vq) / n
    return FluctuationSpec(var_g, var_linear, var_linear + var_g / n, z_abs,
                           (pref * t1, pref * t2, pref * t3))
