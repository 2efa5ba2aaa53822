"""Regenerate the four simulation figures (CSV + SVG + meta.json each).

    python3 scripts/reproduce_figures.py --out figures [--seed 0]
"""
import argparse
from pathlib import Path

from asymspec.harness.experiments import FIGURES, reproduce_figure


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="figures")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=int, default=800)
    ap.add_argument("--n", type=int, default=2000)
    args = ap.parse_args()
    for name in FIGURES:
        files = reproduce_figure(name, Path(args.out) / name, seed=args.seed, p=args.p, n=args.n)
        print(f"{name}: {files['meta'].parent}")


if __name__ == "__main__":
    main()
