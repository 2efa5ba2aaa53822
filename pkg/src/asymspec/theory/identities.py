"""Exact algebraic identities used as checks: the minor expansion of
det(A + B) and the secular determinant that certifies outlier eigenvalues."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from ..linalg import as_dense, solve_shifted
from ..model import SignalSpec
from .limits import TheoryError

MAX_EXPANSION_DIM = 10


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _det(M: np.ndarray) -> float:
    return 1.0 if M.shape[0] == 0 else float(np.linalg.det(M))


def det_sum_expansion(A, B) -> float:
    """det(A + B) as the signed sum over equal-size index subsets I, J of
    det(A[I, J]) * det(B[I^c, J^c]).

    The sign is that of the permutation taking the ordering (I, I^c) to
    (J, J^c). The empty minor has determinant 1.
    """
    A = as_dense(A, name="A")
    B = as_dense(B, name="B")
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise TheoryError("A and B must be square and of equal size")
    n = A.shape[0]
    if n > MAX_EXPANSION_DIM:
        raise TheoryError(f"dimension {n} exceeds the expansion limit {MAX_EXPANSION_DIM}")
    idx = range(n)
    total = 0.0
    for k in range(n + 1):
        for I in combinations(idx, k):
            Ic = [i for i in idx if i not in I]
            row_order = list(I) + Ic
            for J in combinations(idx, k):
                Jc = [j for j in idx if j not in J]
                col_order = list(J) + Jc
                # position t holds row_order[t]; send it to col_order[t]
                perm = [0] * n
                for a, b in zip(row_order, col_order):
                    perm[a] = b
                sgn = _perm_sign(perm)
                total += sgn * _det(A[np.ix_(I, J)]) * _det(B[np.ix_(Ic, Jc)])
    return total


def signal_frame(signal: SignalSpec) -> tuple[np.ndarray, np.ndarray]:
    """W with columns (u_i; v_i)/sqrt2 then (u_i; -v_i)/sqrt2, and diag(d, -d)."""
    U, V, d = signal.U, signal.V, signal.d
    W = np.vstack([np.hstack([U, U]), np.hstack([V, -V])]) / np.sqrt(2.0)
    return W, np.concatenate([d, -d])


def secular_value(X_noise, signal: SignalSpec, lam: complex, cond_cap: float = 1e12) -> complex:
    """det(I + D W^T (X - lam)^{-1} W), zero exactly at eigenvalues of X + W D W^T.

    X is the (p+n) noise linearization [[0, A], [B^T, 0]]. The resolvent is
    applied through the p x p product: with G = (A B^T - lam^2)^{-1},

        top    = G (lam W_top + A W_bot)
        bottom = (B^T top - W_bot) / lam
    """
    X = as_dense(X_noise, name="noise linearization")
    p, n = signal.p, signal.n
    if X.shape != (p + n, p + n):
        raise TheoryError(f"noise linearization has shape {X.shape}, expected {(p + n, p + n)}")
    W, D = signal_frame(signal)
    if D.size == 0:
        return 1.0 + 0j
    lam = complex(lam)
    if lam == 0:
        raise TheoryError("lambda must be nonzero")
    A, Bt = X[:p, p:], X[p:, :p]
    Wt, Wb = W[:p], W[p:]
    if p <= n:
        top = solve_shifted(A @ Bt, lam * lam, lam * Wt + A @ Wb, cond_cap=cond_cap)
        bottom = (Bt @ top - Wb) / lam
        RW = np.vstack([top, bottom])
    else:
        RW = solve_shifted(X, lam, W, cond_cap=cond_cap)
    small = np.eye(D.size) + D[:, None] * (W.T @ RW)
    return complex(np.linalg.det(small))
