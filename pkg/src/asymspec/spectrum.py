"""Eigenvalues of the asymmetrized linearization Y = [[0, H1], [H2^T, 0]].

The nonzero spectrum of Y is {+lam_i, -lam_i} with lam_i^2 running over the
eigenvalues of H1 H2^T. We store one square root per product eigenvalue,
choosing arg(lam) in (-pi/2, pi/2], ordered by decreasing modulus with every
lam of positive argument immediately followed by its conjugate.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .linalg import as_dense, eig_general, eigenvalues, svd_values

PAIR_TOL = 1e-9


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumResult:
    lambdas: np.ndarray
    p: int
    n: int
    eigenvectors: list[tuple[np.ndarray, np.ndarray]] | None = None
    ill_conditioned: tuple[bool, ...] = ()
    # the linearization, kept when eigenvectors were requested so that
    # cluster projections can fall back on an invariant-subspace basis
    linearization: np.ndarray | None = field(default=None, repr=False)

    @property
    def zero_multiplicity(self) -> int:
        return abs(self.n - self.p)

    @property
    def pairs_negated(self) -> bool:
        return True

    @property
    def N(self) -> int:
        return self.p + self.n

    def full_spectrum(self) -> np.ndarray:
        return np.concatenate([self.lambdas, -self.lambdas, np.zeros(self.zero_multiplicity)])

    def to_csv(self, path: str | Path | None = None, flagged: Sequence[int] | None = None) -> str:
        """Write `index,re,im,magnitude,arg[,flagged]`; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["index", "re", "im", "magnitude", "arg"]
        flags = None
        if flagged is not None:
            header.append("flagged")
            flags = set(int(i) for i in flagged)
        w.writerow(header)
        for i, lam in enumerate(self.lambdas):
            row = [i, repr(float(lam.real)), repr(float(lam.imag)), repr(float(abs(lam))), repr(float(np.angle(lam)))]
            if flags is not None:
                row.append(int(i in flags))
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def build_linearization(H1, H2) -> np.ndarray:
    A = as_dense(H1, name="H1")
    B = as_dense(H2, name="H2")
    if A.shape != B.shape:
        raise SpectrumError(f"H1 {A.shape} and H2 {B.shape} must have the same shape")
    p, n = A.shape
    Y = np.zeros((p + n, p + n))
    Y[:p, p:] = A
    Y[p:, :p] = B.T
    return Y


def principal_root(mu: np.ndarray) -> np.ndarray:
    """Square root with arg in (-pi/2, pi/2]; negative reals map to +i sqrt|mu|."""
    mu = np.asarray(mu, dtype=complex)
    lam = np.sqrt(mu)
    on_axis = lam.real == 0
    lam[on_axis] = 1j * np.abs(lam[on_axis])
    return lam


def order_roots(lam: np.ndarray, tol: float = PAIR_TOL) -> np.ndarray:
    """Sort by decreasing modulus, conjugate pairs adjacent with arg > 0 first."""
    lam = np.asarray(lam, dtype=complex)
    if lam.size == 0:
        return lam
    scale = max(float(np.abs(lam).max()), 1.0)
    band = tol * scale
    units: list[tuple[float, list[complex]]] = []
    # roots on the real line or the +i axis have no conjugate partner in storage
    single = [abs(x.imag) <= band or abs(x.real) <= band for x in lam]
    upper = [x for x, s in zip(lam, single) if not s and x.imag > 0]
    lower = [x for x, s in zip(lam, single) if not s and x.imag < 0]
    for x, s in zip(lam, single):
        if s:
            units.append((abs(x), [x]))
    # match every upper-half root with its nearest conjugate partner
    lower_left = list(lower)
    for x in sorted(upper, key=lambda v: -abs(v)):
        if lower_left:
            gaps = [abs(np.conj(x) - y) for y in lower_left]
            j = int(np.argmin(gaps))
            if gaps[j] <= 1e-6 * scale:
                units.append((abs(x), [x, lower_left.pop(j)]))
            else:
                units.append((abs(x), [x]))
        else:
            units.append((abs(x), [x]))
    for y in lower_left:
        units.append((abs(y), [y]))
    units.sort(key=lambda u: -u[0])
    return np.array([v for _, grp in units for v in grp], dtype=complex)


def _product_eigenvalues(H1: np.ndarray, H2: np.ndarray) -> np.ndarray:
    p, n = H1.shape
    if p <= n:
        return eigenvalues(H1 @ H2.T)
    # same nonzero spectrum, smaller matrix; pad the p - n extra zeros away
    return eigenvalues(H2.T @ H1)


def eigs_asym(H1, H2, want_vectors: int = 0, cluster_tol: float = 1e-10) -> SpectrumResult:
    """Stored square roots of spec(H1 H2^T) plus optional leading eigenvectors of Y."""
    A = as_dense(H1, name="H1")
    B = as_dense(H2, name="H2")
    if A.shape != B.shape:
        raise SpectrumError(f"H1 {A.shape} and H2 {B.shape} must have the same shape")
    p, n = A.shape
    lam = order_roots(principal_root(_product_eigenvalues(A, B)))
    if want_vectors <= 0:
        return SpectrumResult(lam, p, n)

    Y = build_linearization(A, B)
    pairs = eig_general(Y, want_vectors=True, cluster_tol=cluster_tol)
    vals = np.array([pr.value for pr in pairs])
    used: set[int] = set()
    vecs, ill = [], []
    for i in range(min(int(want_vectors), lam.size)):
        dist = np.abs(vals - lam[i])
        dist[list(used)] = np.inf
        j = int(np.argmin(dist))
        used.add(j)
        pr = pairs[j]
        vecs.append((pr.right, pr.left))
        ill.append(pr.ill_conditioned)
    return SpectrumResult(lam, p, n, vecs, tuple(ill), Y)


def singular_baseline(H) -> np.ndarray:
    return svd_values(H)


@dataclass(frozen=True)
class ProjectionEstimate:
    index_set: tuple[int, ...]
    value: complex
    reference: float | None = None
    method: str = "vectors"


def _schur_projection(Y: np.ndarray, centers: np.ndarray, radius: float, a: np.ndarray) -> complex:
    """<a, P a> for the spectral projector of the eigenvalues near `centers`."""
    def inside(z):
        return bool(np.min(np.abs(centers - z)) <= radius)

    T, Q, sdim = sla.schur(Y.astype(complex), output="complex", sort=inside)
    if sdim == 0:
        raise SpectrumError("no eigenvalues found in the requested cluster")
    T11, T12, T22 = T[:sdim, :sdim], T[:sdim, sdim:], T[sdim:, sdim:]
    R = sla.solve_sylvester(T11, -T22, T12) if T22.size else np.zeros((sdim, 0))
    b = Q.conj().T @ a
    top = b[:sdim] + R @ b[sdim:]
    return complex(np.vdot(b[:sdim], top))


def eigvec_projection(result: SpectrumResult, cluster: Sequence[int], a,
                      reference: float | None = None, degenerate_tol: float = 1e-10) -> ProjectionEstimate:
    """<a, P~ a> = sum_j (a^* w~_j)(w^_j^* a) over the cluster."""
    a = np.asarray(a, dtype=complex).ravel()
    if not np.isclose(np.linalg.norm(a), 1.0, atol=1e-10):
        raise SpectrumError("direction a must have unit norm")
    idx = tuple(int(i) for i in cluster)
    if result.eigenvectors is None or any(i >= len(result.eigenvectors) for i in idx):
        raise SpectrumError(f"eigenvectors missing for cluster {idx}")
    if a.size != result.N:
        raise SpectrumError(f"direction has length {a.size}, expected {result.N}")

    if any(result.ill_conditioned[i] for i in idx):
        centers = result.lambdas[list(idx)]
        gaps = np.abs(result.lambdas[:, None] - centers[None, :])
        others = np.delete(np.arange(result.lambdas.size), idx)
        sep = gaps[others].min() if others.size else 1.0
        val = _schur_projection(result.linearization, centers, 0.5 * sep, a)
        return ProjectionEstimate(idx, val, reference, "schur")

    total = 0j
    for i in idx:
        r, l = result.eigenvectors[i]
        if abs(np.vdot(l, r)) < degenerate_tol:
            raise SpectrumError(f"degenerate biorthogonal normalization at index {i}")
        total += np.vdot(a, r) * np.vdot(l, a)
    return ProjectionEstimate(idx, complex(total), reference, "vectors")
