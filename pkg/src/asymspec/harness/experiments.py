"""Monte Carlo experiments. Each ``run_*`` returns an ExperimentSummary whose
metrics are a pure function of its inputs (seed included)."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import stats

from ..detector import detect, resolve_N
from ..linalg import eigenvalues, solve_shifted
from ..model import (
    ExperimentConfig,
    NoiseDistribution,
    SigmaSpec,
    SignalSpec,
    VarianceProfile,
    standard_basis_sigma,
    standard_basis_signal,
)
from ..sampler import assemble_pair, sample_noise, stream
from ..spectrum import build_linearization, eigs_asym, eigvec_projection, singular_baseline
from ..theory import (
    dyson_solve,
    fluct_variance,
    null_edge,
    secular_value,
    threshold,
    trace_moment_limit,
    trace_moment_pairing_limit,
    trace_variance_limit,
    trace_variance_pairing_limit,
)
from .pool import map_trials

MATCH_RADIUS = 0.3
LEAD = 20


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class TrialRecord:
    trial_index: int
    lambdas: list[complex] = field(default_factory=list)
    report: dict = field(default_factory=dict)
    singular: list[float] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        d = {"trial_index": self.trial_index, "lambdas": self.lambdas, "report": self.report,
             "singular": self.singular, "extra": self.extra}
        if timing:
            d["wall_time"] = self.wall_time
        return _jsonable(d)


@dataclass
class ExperimentSummary:
    name: str
    config: dict
    metrics: dict
    theory: dict
    records: list[TrialRecord] = field(default_factory=list)

    def to_dict(self, records: bool = False, timing: bool = False) -> dict:
        d = {"name": self.name, "config": self.config, "metrics": self.metrics, "theory": self.theory}
        if records:
            d["records"] = [r.to_dict(timing) for r in self.records]
        return _jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2, sort_keys=True)


def paper_config(p=800, n=2000, d=(1.5, 1.2, 0.5), sigmas=(3.0, 2.0), profile="ones",
                 dist: NoiseDistribution | None = None, trials=20, seed=0, truncate=None) -> ExperimentConfig:
    """Simulation-study defaults: signals on e_3.., e~_4.., spikes on e_1, e_2."""
    signal = standard_basis_signal(p, n, d) if len(d) else SignalSpec.empty(p, n)
    sigma = standard_basis_sigma(p, sigmas) if len(sigmas) else SigmaSpec.identity(p)
    if profile == "ones":
        T = VarianceProfile.ones(p, n)
    elif profile == "blocks":
        T = VarianceProfile.row_blocks(p, n, (1.0, 1.5))
    elif isinstance(profile, VarianceProfile):
        T = profile
    else:
        raise ValueError(f"unknown profile {profile!r}")
    return ExperimentConfig(p, n, signal, sigma, T, dist or NoiseDistribution.gaussian(),
                            trials, seed, truncate)


def match_signals(targets: Sequence[float], estimates: Sequence[float], radius: float = MATCH_RADIUS):
    """Greedy nearest matching of detections to true strengths, largest first."""
    left = list(range(len(estimates)))
    out = {}
    for i in sorted(range(len(targets)), key=lambda j: -targets[j]):
        if not left:
            break
        j = min(left, key=lambda k: abs(estimates[k] - targets[i]))
        if abs(estimates[j] - targets[i]) <= radius:
            out[i] = j
            left.remove(j)
    return out


# --------------------------------------------------------------------- first order

def _first_order_trial(payload, t):
    cfg, n_conv, certify, sv_margin, edge = payload
    t0 = time.perf_counter()
    pair = assemble_pair(cfg, t)
    spec = eigs_asym(pair.H1, pair.H2)
    N = resolve_N(cfg.p, cfg.n, n_conv)
    rep = detect(spec, N)
    sv = singular_baseline(pair.H1)
    extra: dict[str, Any] = {"sv_outliers": int(np.sum(sv > edge + sv_margin))}
    if certify and rep.flagged:
        S = (cfg.signal.U * cfg.signal.d) @ cfg.signal.V.T
        Xlin = build_linearization(pair.H1 - S, pair.H2 - S)
        extra["secular"] = [abs(secular_value(Xlin, cfg.signal, spec.lambdas[i]))
                            for i in rep.flagged_indices]
    flagged_vals = [complex(spec.lambdas[i]) for i in rep.flagged_indices]
    rec = TrialRecord(t, [complex(x) for x in spec.lambdas[:LEAD]], rep.to_dict(),
                      [float(x) for x in sv[:LEAD]], extra, time.perf_counter() - t0)
    rec.extra["flagged_values"] = flagged_vals
    return rec


def run_first_order(config: ExperimentConfig, n_convention="p+n", certify: bool = False,
                    eps: float = 0.1, workers: int | None = None, sv_margin: float = 0.05) -> ExperimentSummary:
    thr = threshold(config.profile, config.n)
    edge = (null_edge(config.profile, config.p, config.n) if config.profile.is_flat()
            else null_edge(config.profile, config.p, config.n, "monte_carlo", trials=10, seed=config.seed))
    recs = map_trials(_first_order_trial, (config, n_convention, certify, sv_margin, edge),
                      config.trials, workers)
    d = config.signal.d
    sup = [i for i in range(d.size) if d[i] > thr]
    smax = config.sigma.sigma_max()
    bound = config.n ** (-0.5 + eps) * smax ** 2
    hits = {i: 0 for i in sup}
    errs: dict[int, list[float]] = {i: [] for i in sup}
    extras, counts, sv_counts, secular = 0, [], [], []
    for r in recs:
        vals = r.extra["flagged_values"]
        m = match_signals([d[i] for i in sup], [v.real for v in vals])
        for a, j in m.items():
            hits[sup[a]] += 1
            errs[sup[a]].append(abs(vals[j] - d[sup[a]]))
        extras += int(len(vals) > len(m))
        counts.append(len(vals))
        sv_counts.append(r.extra["sv_outliers"])
        secular.extend(r.extra.get("secular", []))
    T = len(recs)
    per = {
        f"d{i + 1}": {
            "d": float(d[i]),
            "detection_rate": hits[i] / T,
            "median_abs_error": float(np.median(errs[i])) if errs[i] else math.nan,
            "within_bound": bool(errs[i] and np.median(errs[i]) <= bound),
        }
        for i in sup
    }
    metrics = {
        "signals": per,
        "false_extra_rate": extras / T,
        "median_detections": float(np.median(counts)),
        "median_sv_outliers": float(np.median(sv_counts)),
        "bound": bound,
        "max_secular": float(max(secular)) if secular else None,
    }
    theory = {"threshold": thr, "null_edge": edge, "sigma_max": smax, "eps": eps,
              "supercritical": [float(d[i]) for i in sup]}
    return ExperimentSummary("first_order", config.digest(), metrics, theory, recs)


# -------------------------------------------------------------------- null / baseline

def run_null_calibration(p=200, n=500, sigmas=(3.0, 2.0), trials=100, seed=0, sv_margin=0.05,
                         n_convention="p+n", workers=None) -> ExperimentSummary:
    cfg = paper_config(p, n, d=(), sigmas=sigmas, trials=trials, seed=seed)
    s = run_first_order(cfg, n_convention, workers=workers, sv_margin=sv_margin)
    counts = [r.extra["flagged_values"] for r in s.records]
    ev_zero = sum(1 for c in counts if len(c) == 0) / len(counts)
    sv_pos = sum(1 for r in s.records if r.extra["sv_outliers"] >= 1) / len(s.records)
    s.name = "null_calibration"
    s.metrics.update({"ev_zero_rate": ev_zero, "sv_alarm_rate": sv_pos})
    return s


# -------------------------------------------------------------------- second order

def _second_order_trial(payload, t):
    cfg, idx = payload
    pair = assemble_pair(cfg, t)
    lam = eigs_asym(pair.H1, pair.H2).lambdas
    return complex(lam[idx])


def run_second_order(config: ExperimentConfig, signal_index: int = 0,
                     workers: int | None = None) -> ExperimentSummary:
    vals = np.array(map_trials(_second_order_trial, (config, signal_index), config.trials, workers))
    d = float(config.signal.d[signal_index])
    dev = vals.real - d
    fs = fluct_variance(config.profile, config.n, config.sigma, config.signal.U[:, signal_index],
                        config.signal.V[:, signal_index], d, other_d=config.signal.d)
    var = float(np.var(dev, ddof=1))
    metrics = {
        "mean_error": float(dev.mean()),
        "empirical_variance": var,
        "n_times_variance": var * config.n,
        "ratio_to_var_total": var / fs.var_total,
        "ratio_to_var_total_normalized": var / fs.var_total_normalized,
        "bias_tolerance": 3 * math.sqrt(fs.var_total / config.trials) + 0.5 / config.n,
        "skew": float(stats.skew(dev)),
        "excess_kurtosis": float(stats.kurtosis(dev)),
        "max_abs_imag": float(np.abs(vals.imag).max()),
    }
    theory = {"var_g": fs.var_g, "var_linear": fs.var_linear, "var_total": fs.var_total,
              "var_total_normalized": fs.var_total_normalized, "z_abs_used": fs.z_abs_used,
              "terms": list(fs.terms)}
    return ExperimentSummary("second_order", config.digest(), metrics, theory)


# -------------------------------------------------------------------- heavy tails

def run_heavy_tail_comparison(config: ExperimentConfig, sv_margin: float = 0.1,
                              workers: int | None = None) -> ExperimentSummary:
    s = run_first_order(config, workers=workers, sv_margin=sv_margin)
    ev = [len(r.extra["flagged_values"]) for r in s.records]
    sv = [r.extra["sv_outliers"] for r in s.records]
    s.name = "heavy_tail"
    s.metrics.update({
        "median_sv_outliers": float(np.median(sv)),
        "median_ev_detections": float(np.median(ev)),
        "sv_counts": sv,
        "ev_counts": ev,
        "sv_margin": sv_margin,
    })
    return s


# -------------------------------------------------------------------- iid outlier

def _iid_trial(payload, t):
    n, c_values, seed = payload
    X = stream(seed, t, 7).standard_normal((n, n)) / math.sqrt(n)
    X[np.arange(len(c_values)), np.arange(len(c_values))] += np.asarray(c_values, float)
    return eigenvalues(X)


def run_iid_outlier(n: int = 1000, c_values: Sequence[float] = (2.0,), trials: int = 50, seed: int = 0,
                    radius: float = 1.1, near: float = 0.15, workers: int | None = None) -> ExperimentSummary:
    spectra = map_trials(_iid_trial, (n, tuple(c_values), seed), trials, workers)
    sup = [c for c in c_values if abs(c) > 1.0]
    dists = {c: [] for c in c_values}
    clean = 0
    for ev in spectra:
        taken = set()
        for c in c_values:
            j = int(np.argmin(np.abs(ev - c)))
            dists[c].append(float(abs(ev[j] - c)))
            if c in sup:
                taken.add(j)
        outside = [j for j in np.flatnonzero(np.abs(ev) >= radius) if j not in taken]
        clean += int(len(outside) == 0)
    metrics = {
        "per_c": {str(c): {"median_distance": float(np.median(dists[c])),
                           "near_rate": float(np.mean(np.array(dists[c]) <= near))} for c in c_values},
        "no_other_outside_rate": clean / trials,
        "radius": radius,
    }
    return ExperimentSummary("iid_outlier", {"n": n, "c": list(c_values), "trials": trials, "seed": seed},
                             metrics, {"circular_radius": 1.0})


# -------------------------------------------------------------------- trace moments

def _trace_trial(payload, t):
    p, n, k_max, seed = payload
    prof = VarianceProfile.ones(p, n)
    g = NoiseDistribution.gaussian()
    X1 = sample_noise(prof, g, stream(seed, t, 1))
    X2 = sample_noise(prof, g, stream(seed, t, 2))
    # X^k has zero diagonal blocks for odd k; even k reduce to powers of X1 X2^T
    P = X1 @ X2.T
    out = []
    Pj = np.eye(p)
    for k in range(1, k_max + 1):
        if k % 2:
            out.append(0.0)
        else:
            Pj = Pj @ P
            out.append(2.0 * float(np.trace(Pj)))
    return out


def run_trace_moments(p: int = 400, n: int = 1000, k_max: int = 8, trials: int = 200, seed: int = 0,
                      workers: int | None = None) -> ExperimentSummary:
    tr = np.array(map_trials(_trace_trial, (p, n, k_max, seed), trials, workers))
    ks = range(1, k_max + 1)
    metrics = {f"k{k}": {"mean": float(tr[:, k - 1].mean()), "variance": float(tr[:, k - 1].var(ddof=1)),
                         "stderr": float(tr[:, k - 1].std(ddof=1) / math.sqrt(trials))} for k in ks}
    theory = {f"k{k}": {"mean_limit": trace_moment_limit(p, n, k),
                        "mean_pairing": trace_moment_pairing_limit(p, n, k),
                        "variance_limit": trace_variance_limit(p, n, k),
                        "variance_pairing": trace_variance_pairing_limit(p, n, k)} for k in ks}
    return ExperimentSummary("trace_moments", {"p": p, "n": n, "k_max": k_max, "trials": trials, "seed": seed},
                             metrics, theory)


def trace_power_direct(X1: np.ndarray, X2: np.ndarray, k: int) -> float:
    """Tr of the k-th power of the full linearization (oracle for the block shortcut)."""
    Y = build_linearization(X1, X2)
    return float(np.trace(np.linalg.matrix_power(Y, k)))


# -------------------------------------------------------------------- quadratic forms

def _qf_trial(payload, t):
    n, c, z, pairs, seed = payload
    p = max(1, int(round(c * n)))
    prof = VarianceProfile.ones(p, n)
    g = NoiseDistribution.gaussian()
    X1 = sample_noise(prof, g, stream(seed + n, t, 1))
    X2 = sample_noise(prof, g, stream(seed + n, t, 2))
    P = X1 @ X2.T
    out = []
    for iu, iv in pairs:
        e = np.zeros(p)
        e[iv] = 1.0
        Gv = solve_shifted(P, z, e)[:, 0]
        out.append(abs(Gv[iu] + (1.0 / z if iu == iv else 0.0)))
    return out


def run_qf_scaling(n_grid: Sequence[int] = (100, 200, 400, 800), directions: Sequence[tuple[int, int]] = ((0, 0), (0, 1)),
                   trials: int = 200, c: float = 0.4, z: complex = 2.25, seed: int = 0,
                   workers: int | None = None) -> ExperimentSummary:
    """Median |u^T (G(z) + 1/z) v| with G(z) = (X1 X2^T - z)^{-1}, against n.

    z lives on the scale of the product's eigenvalues; the default 2.25 is
    the image of a signal strength 1.5.
    """
    med = {str(dr): [] for dr in directions}
    for n in n_grid:
        res = np.array(map_trials(_qf_trial, (n, c, z, tuple(directions), seed), trials, workers))
        for j, dr in enumerate(directions):
            med[str(dr)].append(float(np.median(res[:, j])))
    logn = np.log(np.asarray(n_grid, float))
    slopes = {k: float(np.polyfit(logn, np.log(v), 1)[0]) for k, v in med.items()}
    return ExperimentSummary("qf_scaling", {"n_grid": list(n_grid), "trials": trials, "c": c, "z": z, "seed": seed},
                             {"medians": med, "slopes": slopes}, {"expected_slope": -0.5})


# -------------------------------------------------------------------- eigenvector projection

def _proj_trial(payload, t):
    cfg, a = payload
    pair = assemble_pair(cfg, t)
    spec = eigs_asym(pair.H1, pair.H2, want_vectors=1)
    est = eigvec_projection(spec, [0], a, reference=1.0)
    return est.value


def run_eigvec_projection(p: int = 200, n: int = 500, d1: float = 1.5, trials: int = 20, seed: int = 0,
                          eps: float = 0.1, workers: int | None = None) -> ExperimentSummary:
    cfg = paper_config(p, n, d=(d1,), sigmas=(), trials=trials, seed=seed)
    W = np.concatenate([cfg.signal.U[:, 0], cfg.signal.V[:, 0]]) / math.sqrt(2)
    vals = np.array(map_trials(_proj_trial, (cfg, W), trials, workers))
    # with a single signal the nearest other eigenvalue of the signal linearization is 0
    gap = d1
    bound = n ** (-0.5 + eps) * cfg.sigma.sigma_max() ** 2 / gap
    dev = np.abs(vals - 1.0)
    return ExperimentSummary("eigvec_projection", cfg.digest(),
                             {"median_deviation": float(np.median(dev)), "max_imag": float(np.abs(vals.imag).max()),
                              "values": vals},
                             {"bound": bound, "gap": gap})


# -------------------------------------------------------------------- Dyson

def run_dyson_check(p: int = 800, n: int = 2000, factor: float = 1.2, etas=(1e-2, 1e-3, 1e-4)) -> ExperimentSummary:
    out = {}
    for name, prof in (("flat", VarianceProfile.ones(p, n)), ("blocks", VarianceProfile.row_blocks(p, n, (1.0, 1.5)))):
        z = factor * threshold(prof, n)
        sols = [dyson_solve(prof, n, z, e) for e in etas]
        ratios = [s.max_ratio() for s in sols]
        out[name] = {
            "z_abs": z,
            "residuals": [s.residual for s in sols],
            "abs_residuals": [s.abs_residual for s in sols],
            "iterations": [s.iterations for s in sols],
            "positive": all(s.is_positive() for s in sols),
            "balance_gaps": [s.balance_gap() for s in sols],
            "max_ratio": ratios,
            "successive_ratio": [ratios[i + 1] / ratios[i] for i in range(len(ratios) - 1)],
        }
    return ExperimentSummary("dyson", {"p": p, "n": n, "factor": factor, "etas": list(etas)}, out, {})


# -------------------------------------------------------------------- figures

FIGURES = {
    "gaussian_iid": dict(d=(1.5, 1.2, 0.5), sigmas=(3.0, 2.0), profile="ones", dist=None),
    "gaussian_iid_multiple": dict(d=(1.5, 1.5, 1.2), sigmas=(3.0, 2.0), profile="ones", dist=None),
    "gaussian_general": dict(d=(1.5, 1.2, 0.5), sigmas=(3.0, 2.0), profile="blocks", dist=None),
    "heavy_iid": dict(d=(1.5, 1.2), sigmas=(), profile="ones", dist=NoiseDistribution.student_t(2.2)),
}


def reproduce_figure(name: str, out_dir: str | Path, seed: int = 0, p: int = 800, n: int = 2000,
                     sv_margin: float = 0.1) -> dict[str, Path]:
    from .svg import scatter_svg

    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    spec = FIGURES[name]
    cfg = paper_config(p, n, trials=1, seed=seed, **spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pair = assemble_pair(cfg, 0)
    res = eigs_asym(pair.H1, pair.H2)
    rep = detect(res)
    res.to_csv(out / "ev.csv", flagged=rep.flagged_indices)
    sv = singular_baseline(pair.H1)
    edge = (null_edge(cfg.profile, p, n) if cfg.profile.is_flat()
            else null_edge(cfg.profile, p, n, "monte_carlo", trials=10, seed=seed))
    flag_sv = sv > edge + sv_margin
    with open(out / "sv.csv", "w") as fh:
        fh.write("index,value,flagged\n")
        for i, (s, f) in enumerate(zip(sv, flag_sv)):
            fh.write(f"{i},{float(s)!r},{int(f)}\n")
    fl = set(rep.flagged_indices)
    lam = np.concatenate([res.lambdas, -res.lambdas])
    hl = [i in fl for i in range(res.lambdas.size)] * 2
    scatter_svg(lam.real, lam.imag, out / "ev.svg", title=f"{name}: eigenvalues of Y",
                highlight=hl, vlines=[(rep.lambda_max_s + rep.shift, "lambda_max^s + N^-1/2")],
                circles=[(rep.lambda_max_s, "lambda_max^s")], xlabel="Re", ylabel="Im")
    scatter_svg(sv, np.zeros(sv.size), out / "sv.svg",
                title=f"{name}: singular values of H1", highlight=list(flag_sv),
                vlines=[(edge, "null edge")], xlabel="singular value")
    meta = {"figure": name, "config": cfg.digest(), "report": rep.to_dict(), "null_edge": edge,
            "threshold": threshold(cfg.profile, n), "sv_flagged": int(flag_sv.sum())}
    (out / "meta.json").write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True))
    return {k: out / f for k, f in (("ev_csv", "ev.csv"), ("sv_csv", "sv.csv"), ("ev_svg", "ev.svg"),
                                    ("sv_svg", "sv.svg"), ("meta", "meta.json"))}
