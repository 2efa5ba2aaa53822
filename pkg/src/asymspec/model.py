"""Model objects: planted signal, noise multiplier, variance profile, configs.

All types validate on construction and are immutable afterwards. Arrays are
stored as read-only numpy copies.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np

from .linalg import op_norm

GRAM_ACCEPT = 1e-10
GRAM_REJECT = 1e-6


class ModelError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _orthonormalize(Q: np.ndarray, name: str) -> np.ndarray:
    """Accept Q if its Gram matrix is I to 1e-10, repair up to 1e-6, reject beyond."""
    if Q.shape[1] == 0:
        return Q
    dev = np.abs(Q.T @ Q - np.eye(Q.shape[1])).max()
    if dev <= GRAM_ACCEPT:
        return Q
    if dev > GRAM_REJECT:
        raise ModelError(f"{name} columns are not orthonormal (Gram deviation {dev:.2e})")
    # modified Gram-Schmidt through QR; fix the column signs so Q ~ R-diagonal-positive
    q, r = np.linalg.qr(Q)
    return q * np.sign(np.diag(r))


def _descending_nonneg(x: np.ndarray, name: str) -> None:
    if np.any(x < 0):
        raise ModelError(f"{name} must be nonnegative")
    if np.any(np.diff(x) > 0):
        raise ModelError(f"{name} must be sorted in descending order")


@dataclass(frozen=True)
class SignalSpec:
    """Rank-k signal S = U diag(d) V^T with orthonormal U (p x k), V (n x k)."""

    d: np.ndarray
    U: np.ndarray
    V: np.ndarray
    c_max: float = 100.0

    def __post_init__(self):
        d = _frozen(np.atleast_1d(self.d)) if np.size(self.d) else _frozen(np.zeros(0))
        U = np.asarray(self.U, dtype=float)
        V = np.asarray(self.V, dtype=float)
        if U.ndim != 2 or V.ndim != 2:
            raise ModelError("U and V must be 2-D")
        k = d.size
        if U.shape[1] != k or V.shape[1] != k:
            raise ModelError(f"U, V must have {k} columns, got {U.shape[1]} and {V.shape[1]}")
        _descending_nonneg(d, "signal strengths")
        if k and d[0] > self.c_max:
            raise ModelError(f"d_1 = {d[0]} exceeds the cap {self.c_max}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "U", _frozen(_orthonormalize(U, "U")))
        object.__setattr__(self, "V", _frozen(_orthonormalize(V, "V")))

    @property
    def k(self) -> int:
        return self.d.size

    @property
    def p(self) -> int:
        return self.U.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @classmethod
    def empty(cls, p: int, n: int) -> "SignalSpec":
        return cls(np.zeros(0), np.zeros((p, 0)), np.zeros((n, 0)))


@dataclass(frozen=True)
class SigmaSpec:
    """Noise multiplier Sigma = I + Xi diag(sigmas) Theta^T acting on R^p."""

    sigmas: np.ndarray
    Xi: np.ndarray
    Theta: np.ndarray
    K: float = 10.0

    def __post_init__(self):
        s = _frozen(np.atleast_1d(self.sigmas)) if np.size(self.sigmas) else _frozen(np.zeros(0))
        Xi = np.asarray(self.Xi, dtype=float)
        Th = np.asarray(self.Theta, dtype=float)
        if Xi.ndim != 2 or Th.ndim != 2 or Xi.shape != Th.shape:
            raise ModelError("Xi and Theta must be 2-D arrays of equal shape")
        if Xi.shape[1] != s.size:
            raise ModelError(f"Xi, Theta must have {s.size} columns")
        _descending_nonneg(s, "spike strengths")
        object.__setattr__(self, "sigmas", s)
        object.__setattr__(self, "Xi", _frozen(_orthonormalize(Xi, "Xi")))
        object.__setattr__(self, "Theta", _frozen(_orthonormalize(Th, "Theta")))
        smin = self._singular_values().min() if self.p else 1.0
        if smin <= 0 or 1.0 / smin > self.K:
            raise ModelError(
                f"Sigma is singular or badly conditioned: ||Sigma^-1|| = "
                f"{np.inf if smin <= 0 else 1.0 / smin:.3g} > K = {self.K}"
            )

    @property
    def r(self) -> int:
        return self.sigmas.size

    @property
    def p(self) -> int:
        return self.Xi.shape[0]

    @classmethod
    def identity(cls, p: int) -> "SigmaSpec":
        return cls(np.zeros(0), np.zeros((p, 0)), np.zeros((p, 0)))

    def _singular_values(self) -> np.ndarray:
        # Sigma is the identity off span(Xi, Theta); reduce to that subspace.
        if self.r == 0:
            return np.ones(1)
        B = np.hstack([self.Xi, self.Theta])
        Q, _ = np.linalg.qr(B)
        Q = Q[:, : np.linalg.matrix_rank(B)]
        small = np.eye(Q.shape[1]) + (Q.T @ self.Xi) * self.sigmas @ (self.Theta.T @ Q)
        sv = np.linalg.svd(small, compute_uv=False)
        if Q.shape[1] < self.p:
            sv = np.append(sv, 1.0)
        return sv

    def sigma_max(self) -> float:
        """Operator norm of Sigma."""
        return float(self._singular_values().max())

    def inverse_norm(self) -> float:
        return float(1.0 / self._singular_values().min())

    def check_growth(self, n: int) -> None:
        """Warn when the largest spike exceeds n^{1/4}."""
        if self.r and self.sigmas[0] > n ** 0.25:
            warnings.warn(
                f"largest spike {self.sigmas[0]:.3g} exceeds n^(1/4) = {n ** 0.25:.3g}; "
                "outlier guarantees may not hold",
                stacklevel=2,
            )

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Sigma @ X without forming the p x p matrix."""
        if self.r == 0:
            return np.array(X, dtype=float, copy=True)
        return X + (self.Xi * self.sigmas) @ (self.Theta.T @ X)

    def apply_transpose(self, x: np.ndarray) -> np.ndarray:
        """Sigma^T @ x."""
        if self.r == 0:
            return np.array(x, dtype=float, copy=True)
        return x + (self.Theta * self.sigmas) @ (self.Xi.T @ x)


@dataclass(frozen=True)
class VarianceProfile:
    """p x n matrix T of rescaled entry variances, T_ij = n Var(x_ij)."""

    T: np.ndarray
    t_lo: float = field(init=False)
    t_hi: float = field(init=False)

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if T.ndim != 2 or T.size == 0:
            raise ModelError("variance profile must be a non-empty 2-D array")
        if not np.all(np.isfinite(T)):
            raise ModelError("variance profile has non-finite entries")
        lo, hi = float(T.min()), float(T.max())
        if lo <= 0:
            raise ModelError(f"variance profile must be strictly positive (min entry {lo})")
        object.__setattr__(self, "T", _frozen(T))
        object.__setattr__(self, "t_lo", lo)
        object.__setattr__(self, "t_hi", hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.T.shape

    @classmethod
    def ones(cls, p: int, n: int, t: float = 1.0) -> "VarianceProfile":
        return cls(np.full((p, n), float(t)))

    @classmethod
    def row_blocks(cls, p: int, n: int, levels) -> "VarianceProfile":
        """Equal-height row blocks with constant level each, e.g. (1, 1.5)."""
        levels = list(levels)
        edges = np.linspace(0, p, len(levels) + 1).round().astype(int)
        T = np.empty((p, n))
        for lev, a, b in zip(levels, edges[:-1], edges[1:]):
            T[a:b] = lev
        return cls(T)

    def is_flat(self) -> bool:
        return self.t_lo == self.t_hi

    def rank_one_factors(self, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray] | None:
        """Return (col, row) with T = outer(col, row) when T has rank one."""
        T = self.T
        j = int(np.argmax(np.abs(T).sum(axis=0)))
        col = T[:, j].copy()
        row = T[np.argmax(np.abs(col))] / col.max()
        if np.abs(np.outer(col, row) - T).max() <= tol * self.t_hi:
            return col, row
        return None

    def op_norm(self) -> float:
        f = self.rank_one_factors()
        if f is not None:
            return float(np.linalg.norm(f[0]) * np.linalg.norm(f[1]))
        return op_norm(self.T)


@dataclass(frozen=True)
class NoiseDistribution:
    kind: Literal["gaussian", "student_t", "rademacher"] = "gaussian"
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t", "rademacher"):
            raise ModelError(f"unknown noise distribution {self.kind!r}")
        if self.kind == "student_t":
            if self.nu is None or not self.nu > 2:
                raise ModelError("Student-t noise needs nu > 2 for a finite variance")

    @classmethod
    def gaussian(cls) -> "NoiseDistribution":
        return cls("gaussian")

    @classmethod
    def student_t(cls, nu: float) -> "NoiseDistribution":
        return cls("student_t", float(nu))

    @classmethod
    def rademacher(cls) -> "NoiseDistribution":
        return cls("rademacher")


def sigma_matrix(spec: SigmaSpec, p: int) -> np.ndarray:
    if spec.p != p:
        raise ModelError(f"Sigma spec has dimension {spec.p}, requested {p}")
    return np.eye(p) + (spec.Xi * spec.sigmas) @ spec.Theta.T


def signal_matrix(spec: SignalSpec) -> np.ndarray:
    return (spec.U * spec.d) @ spec.V.T


def standard_basis_signal(p: int, n: int, d) -> SignalSpec:
    """u_i = e_{i+2} in R^p, v_i = e_{i+3} in R^n (1-indexed), d sorted descending."""
    d = np.sort(np.asarray(d, dtype=float))[::-1]
    k = d.size
    if k > min(p, n) - 6:
        raise ModelError(f"dimensions ({p}, {n}) too small for {k} standard-basis signals")
    U = np.zeros((p, k))
    V = np.zeros((n, k))
    for i in range(k):
        U[i + 2, i] = 1.0
        V[i + 3, i] = 1.0
    return SignalSpec(d, U, V)


def standard_basis_sigma(p: int, sigmas) -> SigmaSpec:
    """Sigma = I + sum_j sigma_j e_j e_j^T."""
    s = np.sort(np.asarray(sigmas, dtype=float))[::-1]
    E = np.zeros((p, s.size))
    E[np.arange(s.size), np.arange(s.size)] = 1.0
    return SigmaSpec(s, E, E.copy())


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    n: int
    signal: SignalSpec
    sigma: SigmaSpec
    profile: VarianceProfile
    distribution: NoiseDistribution = NoiseDistribution()
    trials: int = 1
    seed: int = 0
    truncate_at: float | None = None

    def __post_init__(self):
        p, n = self.p, self.n
        if self.signal.p != p or self.signal.n != n:
            raise ModelError("signal vectors do not match (p, n)")
        if self.sigma.p != p:
            raise ModelError("Sigma vectors do not match p")
        if self.profile.shape != (p, n):
            raise ModelError(f"profile has shape {self.profile.shape}, expected {(p, n)}")
        if self.trials < 1:
            raise ModelError("trials must be >= 1")
        if self.truncate_at is not None and self.truncate_at <= 0:
            raise ModelError("truncation level must be positive")
        self.sigma.check_growth(n)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        p, n = int(doc["p"]), int(doc["n"])
        sig = doc.get("signal", {}) or {}
        d = sig.get("d", [])
        basis = sig.get("basis", "standard")
        if basis == "standard":
            signal = standard_basis_signal(p, n, d) if len(d) else SignalSpec.empty(p, n)
        else:
            signal = SignalSpec(np.asarray(d, float), np.asarray(sig["U"], float), np.asarray(sig["V"], float))

        sg = doc.get("sigma", {}) or {}
        sigmas = sg.get("sigmas", [])
        sbasis = sg.get("basis", "standard")
        if not len(sigmas):
            sigma = SigmaSpec.identity(p)
        elif sbasis == "standard":
            sigma = standard_basis_sigma(p, sigmas)
        else:
            sigma = SigmaSpec(np.asarray(sigmas, float), np.asarray(sg["Xi"], float), np.asarray(sg["Theta"], float))

        prof = doc.get("profile", "ones")
        if prof == "ones":
            profile = VarianceProfile.ones(p, n)
        elif isinstance(prof, dict) and "blocks" in prof:
            profile = VarianceProfile.row_blocks(p, n, prof["blocks"])
        elif isinstance(prof, dict) and "T" in prof:
            profile = VarianceProfile(np.asarray(prof["T"], float))
        elif isinstance(prof, dict) and "ones" in prof:
            profile = VarianceProfile.ones(p, n, prof["ones"])
        else:
            raise ModelError(f"cannot parse profile entry {prof!r}")

        dist = doc.get("dist", "gaussian")
        if dist == "gaussian":
            distribution = NoiseDistribution.gaussian()
        elif dist == "rademacher":
            distribution = NoiseDistribution.rademacher()
        elif isinstance(dist, dict) and "student_t" in dist:
            distribution = NoiseDistribution.student_t(dist["student_t"])
        else:
            raise ModelError(f"cannot parse dist entry {dist!r}")

        return cls(
            p=p, n=n, signal=signal, sigma=sigma, profile=profile,
            distribution=distribution,
            trials=int(doc.get("trials", 1)),
            seed=int(doc.get("seed", 0)),
            truncate_at=doc.get("truncate"),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes) -> "ExperimentConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def digest(self) -> dict[str, Any]:
        """Small JSON-friendly summary used in reports."""
        return {
            "p": self.p,
            "n": self.n,
            "d": self.signal.d.tolist(),
            "sigmas": self.sigma.sigmas.tolist(),
            "profile": {"t_lo": self.profile.t_lo, "t_hi": self.profile.t_hi},
            "dist": {"kind": self.distribution.kind, "nu": self.distribution.nu},
            "trials": self.trials,
            "seed": self.seed,
            "truncate": self.truncate_at,
        }
