"""Run every acceptance suite and print one PASS/FAIL line per criterion.

    python3 scripts/run_acceptance.py [--seed 0] [--parallel 4] [--json out.json]
"""
import argparse
import json
import sys
import time

from asymspec.harness.checks import SUITES, run_suite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--parallel", type=int)
    ap.add_argument("--suite", action="append", choices=sorted(SUITES))
    ap.add_argument("--json")
    args = ap.parse_args()
    rows = []
    for name in args.suite or list(SUITES):
        t0 = time.perf_counter()
        for r in run_suite(name, seed=args.seed, workers=args.parallel):
            print(r.line(), flush=True)
            rows.append({"suite": name, "criterion": r.criterion, "passed": r.passed,
                         "detail": r.detail, "seconds": round(time.perf_counter() - t0, 1)})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["passed"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
