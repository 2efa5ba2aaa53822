"""Acceptance checks. Each function runs one experiment at its stated size and
returns CheckResult rows; the CLI and the acceptance tests share them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import NoiseDistribution
from ..theory import det_sum_expansion
from .experiments import (
    paper_config,
    run_dyson_check,
    run_eigvec_projection,
    run_first_order,
    run_heavy_tail_comparison,
    run_iid_outlier,
    run_null_calibration,
    run_qf_scaling,
    run_second_order,
    run_trace_moments,
)


@dataclass(frozen=True)
class CheckResult:
    criterion: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion}: {self.detail}"


def check_first_order(seed: int = 0, trials: int = 20, workers=None) -> list[CheckResult]:
    cfg = paper_config(800, 2000, d=(1.5, 1.2, 0.5), sigmas=(3.0, 2.0), trials=trials, seed=seed)
    s = run_first_order(cfg, certify=True, workers=workers)
    m = s.metrics
    sig = m["signals"]
    rates = [sig[k]["detection_rate"] for k in ("d1", "d2")]
    errs = [sig[k]["median_abs_error"] for k in ("d1", "d2")]
    bound = m["bound"]
    ok = (all(r == 1.0 for r in rates) and m["false_extra_rate"] <= 0.05
          and all(e <= bound for e in errs) and all(e <= 0.1 for e in errs))
    first = CheckResult(
        "1 first-order detection", ok,
        f"rates={rates} false_extra={m['false_extra_rate']:.2f} (<=0.05) "
        f"median|lam-d|={[round(e, 4) for e in errs]} bound={bound:.3f}, practical 0.1")
    sec = m["max_secular"]
    second = CheckResult("10 secular certification", sec is not None and sec < 1e-6,
                         f"max |secular| at flagged outliers = {sec:.3e} (<1e-6)" if sec is not None
                         else "no flagged outliers")
    return [first, second]


def check_null(seed: int = 0, trials: int = 100, workers=None) -> list[CheckResult]:
    flat = run_null_calibration(sigmas=(), trials=trials, seed=seed, workers=workers)
    spiked = run_null_calibration(sigmas=(3.0, 2.0), trials=trials, seed=seed, workers=workers)
    a, b = flat.metrics["ev_zero_rate"], spiked.metrics["ev_zero_rate"]
    c = spiked.metrics["sv_alarm_rate"]
    ok = a >= 0.95 and b >= 0.95 and c >= 0.90
    return [CheckResult("2 null calibration", ok,
                        f"EV zero-detection rate: identity {a:.2f}, spiked {b:.2f} (>=0.95); "
                        f"SV alarm rate spiked {c:.2f} (>=0.90)")]


def check_second_order(seed: int = 0, trials: int = 500, workers=None) -> list[CheckResult]:
    cfg = paper_config(400, 1000, d=(1.5,), sigmas=(), trials=trials, seed=seed)
    s = run_second_order(cfg, 0, workers=workers)
    m, th = s.metrics, s.theory
    r = m["ratio_to_var_total"]
    rn = m["ratio_to_var_total_normalized"]
    bias_ok = abs(m["mean_error"]) <= m["bias_tolerance"]
    return [
        CheckResult("3 second-order variance", 0.8 <= r <= 1.25 and bias_ok,
                    f"n*Var={m['n_times_variance']:.4f} n*var_total={th['var_total'] * cfg.n:.4f} "
                    f"ratio={r:.3f} in [0.8,1.25]; |bias|={abs(m['mean_error']):.2e} <= {m['bias_tolerance']:.2e}"),
        CheckResult("3b second-order variance, unit-eigenvector normalization", 0.8 <= rn <= 1.25,
                    f"ratio to var_total/4 = {rn:.3f}"),
    ]


def check_heavy_tail(seed: int = 0, trials: int = 20, workers=None) -> list[CheckResult]:
    cfg = paper_config(800, 2000, d=(1.5, 1.2), sigmas=(), dist=NoiseDistribution.student_t(2.2),
                       trials=trials, seed=seed)
    s = run_heavy_tail_comparison(cfg, workers=workers)
    m = s.metrics
    rates = [m["signals"][k]["detection_rate"] for k in ("d1", "d2")]
    ok = m["median_sv_outliers"] >= 5 and m["median_ev_detections"] == 2 and min(rates) >= 0.8
    return [CheckResult("4 heavy-tail contrast", ok,
                        f"median SV outliers={m['median_sv_outliers']} (>=5), median EV detections="
                        f"{m['median_ev_detections']} (=2), EV rates={rates} (>=0.8)")]


def check_iid_outlier(seed: int = 0, trials: int = 50, workers=None) -> list[CheckResult]:
    s = run_iid_outlier(1000, (2.0,), trials, seed, workers=workers)
    near = s.metrics["per_c"]["2.0"]["near_rate"]
    clean = s.metrics["no_other_outside_rate"]
    return [CheckResult("5 iid outlier", near >= 0.9 and clean >= 0.9,
                        f"near-2 rate={near:.2f} (>=0.9), no-other-outside rate={clean:.2f} (>=0.9)")]


def check_trace(seed: int = 0, trials: int = 200, workers=None) -> list[CheckResult]:
    s = run_trace_moments(400, 1000, 8, trials, seed, workers=workers)
    m = s.metrics
    m4 = m["k4"]["mean"]
    odd = [m[f"k{k}"]["mean"] for k in (1, 3, 5, 7)]
    v2 = m["k2"]["variance"]
    ok = abs(m4 - 0.32) <= 0.05 and all(abs(x) <= 0.05 for x in odd) and abs(v2 - 0.4) <= 0.1
    pairing = (abs(m4 - s.theory["k4"]["mean_pairing"]) <= 3 * m["k4"]["stderr"]
               and abs(v2 / s.theory["k2"]["variance_pairing"] - 1) <= 0.25)
    return [
        CheckResult("6 trace moments", ok,
                    f"mean Tr X^4={m4:.3f} (0.32+-0.05), odd means={[round(x, 3) for x in odd]} (0+-0.05), "
                    f"Var Tr X^2={v2:.3f} (0.4+-25%)"),
        CheckResult("6b trace moments, pairing-count limits", pairing,
                    f"mean Tr X^4={m4:.3f} vs {s.theory['k4']['mean_pairing']:.3f}+-3se; "
                    f"Var Tr X^2={v2:.3f} vs {s.theory['k2']['variance_pairing']:.3f}+-25%"),
    ]


def check_dyson() -> list[CheckResult]:
    s = run_dyson_check(800, 2000, 1.2)
    rows = []
    for name, m in s.metrics.items():
        ok = (max(m["residuals"]) < 1e-12 and m["positive"] and max(m["balance_gaps"]) < 1e-8
              and max(m["successive_ratio"]) < 1.5)
        rows.append((name, ok, m))
    ok = all(r[1] for r in rows)
    detail = "; ".join(f"{n}: res={max(m['residuals']):.1e} bal={max(m['balance_gaps']):.1e} "
                       f"ratio={max(m['successive_ratio']):.3f}" for n, _, m in rows)
    return [CheckResult("7 Dyson solver", ok, detail)]


def check_qf(seed: int = 0, trials: int = 200, workers=None) -> list[CheckResult]:
    s = run_qf_scaling((100, 200, 400, 800), ((0, 0),), trials, seed=seed, workers=workers)
    slope = s.metrics["slopes"]["(0, 0)"]
    return [CheckResult("8 quadratic-form scaling", -0.65 <= slope <= -0.35,
                        f"log-log slope={slope:.3f} in [-0.65,-0.35]")]


def check_det_identity(seed: int = 0, pairs: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(pairs):
        k = 1 + i % 6
        A, B = rng.standard_normal((k, k)), rng.standard_normal((k, k))
        worst = max(worst, abs(det_sum_expansion(A, B) - np.linalg.det(A + B)))
    return [CheckResult("9 determinant identity", worst <= 1e-9, f"max error={worst:.2e} over {pairs} pairs")]


def check_eigvec(seed: int = 0, trials: int = 20, workers=None) -> list[CheckResult]:
    s = run_eigvec_projection(200, 500, 1.5, trials, seed, workers=workers)
    dev, bound = s.metrics["median_deviation"], s.theory["bound"]
    return [CheckResult("11 eigenvector projection", dev <= bound,
                        f"median |<a,P a>-1|={dev:.4f} <= {bound:.4f} (gap {s.theory['gap']})")]


SUITES = {
    "first_order": check_first_order,
    "null": check_null,
    "second_order": check_second_order,
    "heavy_tail": check_heavy_tail,
    "iid_outlier": check_iid_outlier,
    "trace": check_trace,
    "qf": check_qf,
    "dyson": lambda seed=0, workers=None: check_dyson(),
    "det_identity": lambda seed=0, workers=None: check_det_identity(seed),
    "eigvec": check_eigvec,
}


def run_suite(name: str, seed: int = 0, workers=None) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return SUITES[name](seed=seed, workers=workers)
