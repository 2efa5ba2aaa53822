"""Command-line entry point: simulate, detect, theory, reproduce, check."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..detector import detect, resolve_N
from ..model import ExperimentConfig
from ..spectrum import eigs_asym
from ..theory import dyson_solve, fluct_variance, null_edge, threshold
from .checks import SUITES, run_suite
from .experiments import FIGURES, _jsonable, reproduce_figure, run_first_order
from .pool import env_seed


def _load_config(path: str, trials: int | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(path)
    changes = {"seed": env_seed(cfg.seed)}
    if trials is not None:
        changes["trials"] = int(trials)
    return cfg.replace(**changes)


def _read_matrix(path: str) -> np.ndarray:
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return M


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.trials)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    s = run_first_order(cfg, args.N_convention, workers=args.parallel)
    (out / "summary.json").write_text(s.to_json(records=True))
    print(json.dumps(s.to_dict()["metrics"], indent=2, sort_keys=True))
    return 0


def cmd_detect(args) -> int:
    H1, H2 = _read_matrix(args.h1), _read_matrix(args.h2)
    spec = eigs_asym(H1, H2)
    rep = detect(spec, resolve_N(spec.p, spec.n, args.N_convention))
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text)
    if args.spectrum:
        spec.to_csv(args.spectrum, flagged=rep.flagged_indices)
    print(text)
    return 0


def cmd_theory(args) -> int:
    cfg = _load_config(args.config)
    T, p, n = cfg.profile, cfg.p, cfg.n
    thr = threshold(T, n)
    doc = {"threshold": thr}
    if T.is_flat():
        doc["null_edge"] = null_edge(T, p, n)
    else:
        doc["null_edge"] = null_edge(T, p, n, "monte_carlo", trials=args.edge_trials, seed=cfg.seed)
    z = args.z_factor * thr
    doc["dyson"] = []
    for eta in (1e-2, 1e-3, 1e-4):
        sol = dyson_solve(T, n, z, eta)
        doc["dyson"].append({"eta": eta, "z_abs": z, "residual": sol.residual,
                             "iterations": sol.iterations, "max_ratio": sol.max_ratio()})
    doc["fluctuation"] = []
    for i, d in enumerate(cfg.signal.d):
        if d <= thr:
            continue
        fs = fluct_variance(T, n, cfg.sigma, cfg.signal.U[:, i], cfg.signal.V[:, i], float(d),
                            other_d=cfg.signal.d)
        doc["fluctuation"].append({"d": float(d), "var_g": fs.var_g, "var_linear": fs.var_linear,
                                   "var_total": fs.var_total, "var_total_normalized": fs.var_total_normalized,
                                   "z_abs_used": fs.z_abs_used})
    print(json.dumps(_jsonable(doc), indent=2))
    return 0


def cmd_reproduce(args) -> int:
    files = reproduce_figure(args.figure, args.out, seed=env_seed(args.seed))
    for k, v in files.items():
        print(f"{k}: {v}")
    return 0


def cmd_check(args) -> int:
    rows = run_suite(args.suite, seed=env_seed(args.seed), workers=args.parallel)
    for r in rows:
        print(r.line())
    return 0 if all(r.passed for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asymspec", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run Monte Carlo trials for a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--trials", type=int)
    s.add_argument("--parallel", type=int)
    s.add_argument("--N-convention", dest="N_convention", default="p+n", choices=["p+n", "n", "p"])
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("detect", help="detect signals from two dense CSV samples")
    d.add_argument("--h1", required=True)
    d.add_argument("--h2", required=True)
    d.add_argument("--N-convention", dest="N_convention", default="p+n", choices=["p+n", "n", "p"])
    d.add_argument("--out")
    d.add_argument("--spectrum", help="optional eigenvalue CSV")
    d.set_defaults(func=cmd_detect)

    t = sub.add_parser("theory", help="print theoretical predictions as JSON")
    t.add_argument("--config", required=True)
    t.add_argument("--z-factor", type=float, default=1.2)
    t.add_argument("--edge-trials", type=int, default=20)
    t.set_defaults(func=cmd_theory)

    r = sub.add_parser("reproduce", help="regenerate one simulation figure")
    r.add_argument("--figure", required=True, choices=sorted(FIGURES))
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_reproduce)

    c = sub.add_parser("check", help="run one acceptance suite; exit 1 on failure")
    c.add_argument("--suite", required=True, choices=sorted(SUITES))
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--parallel", type=int)
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
