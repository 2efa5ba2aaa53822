"""Vector Dyson system for the Hermitization of the block noise model.

With TT = T / n the four positive unknowns solve

    1/u1 = eta + TT v2   + |z|^2 / (eta + TT u2)
    1/u2 = eta + TT' v1  + |z|^2 / (eta + TT' u1)
    1/v1 = eta + TT u2   + |z|^2 / (eta + TT v2)
    1/v2 = eta + TT' u1  + |z|^2 / (eta + TT' v1)

u1, v1 live on the p side and u2, v2 on the n side.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..model import VarianceProfile
from .limits import TheoryError

FINE_GRID = (1e-2, 1e-3, 1e-4)


class DysonConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DysonSolution:
    eta: float
    z_abs: float
    u1: np.ndarray
    u2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    residual: float
    iterations: int
    converged: bool = True
    abs_residual: float = 0.0

    def balance_gap(self) -> float:
        """|p<u1> + n<u2> - p<v1> - n<v2>|, zero at an exact solution."""
        return float(abs(self.u1.sum() + self.u2.sum() - self.v1.sum() - self.v2.sum()))

    def max_ratio(self) -> float:
        """max_j max(u_j, v_j) / eta."""
        top = max(self.u1.max(), self.u2.max(), self.v1.max(), self.v2.max())
        return float(top / self.eta)

    def is_positive(self) -> bool:
        return bool(min(self.u1.min(), self.u2.min(), self.v1.min(), self.v2.min()) > 0)


class _Op:
    """Matvecs with T/n, using the rank-one factors when T has them."""

    def __init__(self, T: VarianceProfile, n: int):
        f = T.rank_one_factors()
        self.n = n
        if f is not None:
            self.col, self.row = f[0] / n, f[1]
            self.M = None
        else:
            self.M = T.T / n

    def fwd(self, x):  # (T/n) x, x on the n side
        if self.M is None:
            return self.col * (self.row @ x)
        return self.M @ x

    def adj(self, y):  # (T/n)^T y, y on the p side
        if self.M is None:
            return self.row * (self.col @ y)
        return self.M.T @ y


def _rhs(op: _Op, eta, z2, u1, u2, v1, v2):
    a, b = op.fwd(v2), op.fwd(u2)
    c, d = op.adj(v1), op.adj(u1)
    return (
        eta + a + z2 / (eta + b),
        eta + c + z2 / (eta + d),
        eta + b + z2 / (eta + a),
        eta + d + z2 / (eta + c),
    )


def dyson_solve(T: VarianceProfile, n: int | None = None, z_abs: float = 1.0, eta: float = 1e-2,
                tol: float = 1e-12, max_iter: int = 100_000, damping: float = 0.5) -> DysonSolution:
    """Damped fixed-point iteration from u = v = 1/(eta + 1).

    The reported residual is relative, max |u * rhs - 1| over all four
    equations. The absolute form |1/u - rhs| scales like 1/eta outside the
    bulk and cannot reach 1e-12 in double precision once eta is small; it is
    kept in ``abs_residual`` for reference.
    """
    if not eta > 0:
        raise TheoryError("eta must be positive")
    if not z_abs > 0:
        raise TheoryError("|z| must be positive")
    p, nn = T.shape
    n = nn if n is None else int(n)
    op = _Op(T, n)
    z2 = float(z_abs) ** 2
    start = 1.0 / (eta + 1.0)
    u1, v1 = np.full(p, start), np.full(p, start)
    u2, v2 = np.full(nn, start), np.full(nn, start)
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        r = _rhs(op, eta, z2, u1, u2, v1, v2)
        res = max(float(np.abs(x * rx - 1.0).max()) for x, rx in zip((u1, u2, v1, v2), r))
        if res <= tol:
            break
        u1 = (1 - damping) * u1 + damping / r[0]
        u2 = (1 - damping) * u2 + damping / r[1]
        v1 = (1 - damping) * v1 + damping / r[2]
        v2 = (1 - damping) * v2 + damping / r[3]
    converged = res <= tol
    if not converged:
        warnings.warn(f"Dyson iteration stopped at residual {res:.3e} after {it} steps",
                      DysonConvergenceWarning, stacklevel=2)
    r = _rhs(op, eta, z2, u1, u2, v1, v2)
    abs_res = max(float(np.abs(1.0 / x - rx).max()) for x, rx in zip((u1, u2, v1, v2), r))
    return DysonSolution(float(eta), float(z_abs), u1, u2, v1, v2, res, it, converged, abs_res)


def pseudospectrum_member(T: VarianceProfile, n: int | None = None, z_abs: float = 1.0,
                          tau: float = 1.0, grid=FINE_GRID) -> bool:
    """True when max_j(u_j, v_j)/eta exceeds 1/tau at the finest eta of the grid.

    A three-point stand-in for the limsup as eta -> 0.
    """
    if not tau > 0:
        raise TheoryError("tau must be positive")
    if np.isinf(tau):
        return True
    sol = None
    for eta in grid:
        sol = dyson_solve(T, n, z_abs, eta)
    return sol.max_ratio() > 1.0 / tau
