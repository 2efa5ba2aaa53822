"""Data-driven outlier detection on the stored square roots lam_i.

The noise spectral radius is estimated from eigenvalues well away from the
real axis (argument at least pi / log N), and everything to the right of that
radius plus a shift N^{-1/2} is reported as a signal.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spectrum import SpectrumResult, singular_baseline

NConvention = Literal["p+n", "n", "p"]


def resolve_N(p: int, n: int, convention: NConvention = "p+n") -> int:
    if convention == "p+n":
        return p + n
    if convention == "n":
        return n
    if convention == "p":
        return p
    raise ValueError(f"unknown N convention {convention!r}")


def arg_window(N: int) -> tuple[float, float]:
    if N < 3:
        raise ValueError("N must be at least 3 so that log N > 1")
    return math.pi / math.log(N), math.pi / 2


def lambda_max_s(spectrum: SpectrumResult | np.ndarray, N: int) -> float:
    """max |lam| over lam with arg in [pi / log N, pi / 2]; 0 if that set is empty."""
    lam = spectrum.lambdas if isinstance(spectrum, SpectrumResult) else np.asarray(spectrum, dtype=complex)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    lo, hi = arg_window(N)
    args = np.angle(lam)
    # arg = pi/2 is stored exactly for purely imaginary roots; allow rounding at the top
    inside = (args >= lo) & (args <= hi + 1e-15)
    return float(np.abs(lam[inside]).max()) if inside.any() else 0.0


@dataclass(frozen=True)
class Detection:
    index: int
    re: float
    im: float
    estimate: float
    multiplicity: int = 1
    members: tuple[int, ...] = ()


@dataclass(frozen=True)
class DetectionReport:
    lambda_max_s: float
    shift: float
    N: int
    flagged: tuple[Detection, ...]
    unflagged_leading: tuple[complex, ...] = ()
    fallback: bool = False

    @property
    def count(self) -> int:
        """Number of detected signals, counting a merged cluster by its multiplicity."""
        return sum(d.multiplicity for d in self.flagged)

    @property
    def flagged_indices(self) -> list[int]:
        return [i for d in self.flagged for i in (d.members or (d.index,))]

    def estimates(self) -> list[float]:
        return [d.estimate for d in self.flagged]

    def to_dict(self) -> dict:
        return {
            "lambda_max_s": self.lambda_max_s,
            "shift": self.shift,
            "N": self.N,
            "flagged": [
                {"re": d.re, "im": d.im, "estimate": d.estimate, "multiplicity": d.multiplicity}
                for d in self.flagged
            ],
            "fallback": self.fallback,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def detect(spectrum: SpectrumResult, N: int | None = None, shift: float | None = None,
           n_unflagged: int = 5) -> DetectionReport:
    """Flag every lam with Re lam >= lambda_max_s + N^{-1/2}.

    Flagged values closer than N^{-1/4} are merged into one detection whose
    multiplicity is the cluster size and whose estimate is the mean real part.
    """
    lam = spectrum.lambdas
    N = spectrum.N if N is None else int(N)
    shift = N ** -0.5 if shift is None else float(shift)
    lms = lambda_max_s(spectrum, N)
    fallback = False
    if lms == 0.0:
        bulk = np.abs(lam[lam.size // 2:]) if lam.size > 1 else np.abs(lam)
        lms = float(np.median(bulk))
        fallback = True

    cut = lms + shift
    hits = [i for i in range(lam.size) if lam[i].real >= cut]
    merge_r = N ** -0.25
    groups: list[list[int]] = []
    for i in hits:
        for g in groups:
            if any(abs(lam[i] - lam[j]) < merge_r for j in g):
                g.append(i)
                break
        else:
            groups.append([i])

    flagged = []
    for g in groups:
        vals = lam[g]
        head = g[0]
        flagged.append(Detection(
            index=head,
            re=float(lam[head].real),
            im=float(lam[head].imag),
            estimate=float(vals.real.mean()),
            multiplicity=len(g),
            members=tuple(g),
        ))
    hit_set = set(hits)
    rest = tuple(complex(lam[i]) for i in range(lam.size) if i not in hit_set)[:n_unflagged]
    return DetectionReport(lms, shift, N, tuple(flagged), rest, fallback)


@dataclass(frozen=True)
class BaselineComparison:
    null_edge: float
    margin: float
    sv_outliers: tuple[float, ...]
    ev_detections: tuple[float, ...]

    @property
    def sv_count(self) -> int:
        return len(self.sv_outliers)

    @property
    def ev_count(self) -> int:
        return len(self.ev_detections)


def compare_baseline(H1, spectrum: SpectrumResult, null_edge: float, N: int | None = None,
                     margin: float = 0.05) -> BaselineComparison:
    """Singular values of H1 above null_edge + margin against eigenvalue detections."""
    sv = singular_baseline(H1)
    out = tuple(float(s) for s in sv if s > null_edge + margin)
    rep = detect(spectrum, N)
    ev = tuple(est for d in rep.flagged for est in [d.estimate] * d.multiplicity)
    return BaselineComparison(float(null_edge), float(margin), out, ev)
