"""Outlier fluctuations against the kernel prediction, over several n.

Prints n * Var(lambda_1 - d_1) next to n * var_total and n * var_total / 4.

    python3 scripts/second_order_study.py --n 250 500 1000 --trials 300
"""
import argparse

from asymspec.harness.experiments import paper_config, run_second_order


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--c", type=float, default=0.4)
    ap.add_argument("--d", type=float, default=1.5)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--parallel", type=int)
    args = ap.parse_args()
    print(f"{'n':>6} {'n*Var':>9} {'n*var_total':>12} {'n*var_total/4':>14} {'ratio/4':>8}")
    for n in args.n:
        cfg = paper_config(int(args.c * n), n, d=(args.d,), sigmas=(), trials=args.trials, seed=args.seed)
        s = run_second_order(cfg, 0, workers=args.parallel)
        m, th = s.metrics, s.theory
        print(f"{n:>6} {m['n_times_variance']:>9.4f} {th['var_total'] * n:>12.4f} "
              f"{th['var_total'] * n / 4:>14.4f} {m['ratio_to_var_total_normalized']:>8.3f}")


if __name__ == "__main__":
    main()
