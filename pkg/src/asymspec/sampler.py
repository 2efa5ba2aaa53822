"""Seeded noise generation, sample assembly and heavy-tail truncation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .model import ExperimentConfig, ModelError, NoiseDistribution, VarianceProfile, signal_matrix

# matrix ids inside one trial's key
X1_ID = 1
X2_ID = 2


def stream(seed: int, trial: int = 0, matrix_id: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, trial, matrix id).

    Philox streams derived from a SeedSequence are independent of the order in
    which trials are scheduled, so parallel and serial runs agree bit for bit.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial), int(matrix_id)])
    return np.random.Generator(np.random.Philox(ss))


def _unit_draws(dist: NoiseDistribution, shape, rng: np.random.Generator) -> np.ndarray:
    if dist.kind == "gaussian":
        return rng.standard_normal(shape)
    if dist.kind == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    if dist.kind == "student_t":
        nu = dist.nu
        if nu is None or nu <= 2:
            raise ModelError("Student-t noise needs nu > 2")
        return rng.standard_t(nu, size=shape) / np.sqrt(nu / (nu - 2.0))
    raise ModelError(f"unknown distribution {dist.kind!r}")


def sample_noise(profile: VarianceProfile, dist: NoiseDistribution, rng: np.random.Generator) -> np.ndarray:
    """p x n matrix with independent mean-zero entries of variance t_ij / n."""
    p, n = profile.shape
    Z = _unit_draws(dist, (p, n), rng)
    if profile.is_flat():
        return Z * np.sqrt(profile.t_hi / n)
    return Z * np.sqrt(profile.T / n)


@dataclass(frozen=True)
class SamplePair:
    H1: np.ndarray
    H2: np.ndarray
    X1: np.ndarray | None = None
    X2: np.ndarray | None = None
    S: np.ndarray | None = None
    Sigma: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.H1.shape


def assemble_pair(config: ExperimentConfig, trial: int = 0, keep_components: bool = False,
                  seed: int | None = None) -> SamplePair:
    """Draw X1, X2 independently and return H_a = S + Sigma X_a."""
    seed = config.seed if seed is None else seed
    X1 = sample_noise(config.profile, config.distribution, stream(seed, trial, X1_ID))
    X2 = sample_noise(config.profile, config.distribution, stream(seed, trial, X2_ID))
    if config.truncate_at is not None:
        X1 = truncate(X1, config.truncate_at, config.n, gaussian=config.distribution.kind == "gaussian")
        X2 = truncate(X2, config.truncate_at, config.n, gaussian=config.distribution.kind == "gaussian")
    S = signal_matrix(config.signal)
    H1 = S + config.sigma.apply(X1)
    H2 = S + config.sigma.apply(X2)
    if keep_components:
        from .model import sigma_matrix

        return SamplePair(H1, H2, X1, X2, S, sigma_matrix(config.sigma, config.p))
    return SamplePair(H1, H2)


def truncate(X: np.ndarray, M: float, n: int, gaussian: bool = False) -> np.ndarray:
    """Zero entries with |sqrt(n) x| > M, then recenter.

    For Gaussian entries the truncated law is symmetric and the recentering
    constant is exactly 0. Otherwise the sample mean of the truncated entries
    is subtracted, matrix-wide.
    """
    if not M > 0:
        raise ValueError("truncation level M must be positive")
    X = np.asarray(X, dtype=float)
    Y = np.where(np.abs(np.sqrt(n) * X) <= M, X, 0.0)
    if gaussian:
        return Y
    return Y - Y.mean()


def truncated_gaussian_variance(M: float) -> float:
    """Var(Z 1(|Z| <= M)) for standard normal Z."""
    phi = np.exp(-0.5 * M * M) / np.sqrt(2 * np.pi)
    return float(erf(M / np.sqrt(2)) - 2 * M * phi)
