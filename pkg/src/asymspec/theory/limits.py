"""Closed-form thresholds and limits: detection threshold, null singular edge,
trace moments of the noise linearization."""
from __future__ import annotations

import math
from typing import Literal

import numpy as np

from ..model import NoiseDistribution, VarianceProfile


class TheoryError(ValueError):
    pass


def threshold(T: VarianceProfile, n: int | None = None) -> float:
    """Smallest detectable signal strength sqrt(||T||_op / n)."""
    n = T.shape[1] if n is None else int(n)
    return math.sqrt(T.op_norm() / n)


def null_edge(T: VarianceProfile, p: int, n: int,
              method: Literal["flat_closed_form", "monte_carlo"] = "flat_closed_form",
              trials: int = 50, seed: int = 0) -> float:
    """Right end of the singular-value bulk of a pure-noise p x n sample."""
    if method == "flat_closed_form":
        if not T.is_flat():
            raise TheoryError("the closed-form edge needs a flat profile T = t * ones")
        return math.sqrt(T.t_hi) * (1.0 + math.sqrt(p / n))
    if method == "monte_carlo":
        from ..linalg import svd_values
        from ..sampler import sample_noise, stream

        if T.shape != (p, n):
            raise TheoryError(f"profile has shape {T.shape}, expected {(p, n)}")
        tops = [svd_values(sample_noise(T, NoiseDistribution.gaussian(), stream(seed, t, 0)))[0]
                for t in range(trials)]
        return float(np.median(tops))
    raise TheoryError(f"unknown method {method!r}")


def trace_moment_limit(p: int, n: int, k: int) -> float:
    """Reference limit of E Tr(X^k) for bounded entries: 2 (p/n)^{m+1} if k = 4m, else 0.

    Kept literally. A direct pairing count gives a different value; see
    :func:`trace_moment_pairing_limit`.
    """
    if k < 1:
        raise TheoryError("k must be >= 1")
    if k % 4:
        return 0.0
    return 2.0 * (p / n) ** (k // 4 + 1)


def trace_moment_pairing_limit(p: int, n: int, k: int) -> float:
    """Limit of E Tr(X^k) from the leading Wick pairings, X = [[0, X1], [X2^T, 0]].

    Tr X^{4m} = 2 Tr (X1 X2^T)^{2m}. With independent X1, X2 of variance 1/n
    only the planar pairing that matches each X1 entry with its twin survives,
    giving 2 (p/n)^m.
    """
    if k < 1:
        raise TheoryError("k must be >= 1")
    if k % 4:
        return 0.0
    return 2.0 * (p / n) ** (k // 4)


def trace_variance_limit(p: int, n: int, k: int) -> float:
    """Variance of (p/n)^{k/4} Z_k with Z_k standard normal (reference form), k even."""
    if k % 2:
        return 0.0
    return (p / n) ** (k / 2)


def trace_variance_pairing_limit(p: int, n: int, k: int) -> float:
    """Variance of Tr X^k from the leading pairings: 2k (p/n)^{k/2} for even k.

    For k = 2: Tr X^2 = 2 sum x1_ij x2_ij, variance 4 p n / n^2 = 4 p/n.
    """
    if k % 2:
        return 0.0
    return 2.0 * k * (p / n) ** (k / 2)
