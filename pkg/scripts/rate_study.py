#!/usr/bin/env python3
"""Rate study: per-use OT rate k/n against the p_star * C(W0) reference.

Runs honest sessions over a block-length grid with the shrinking
alpha/eps/gamma schedule and prints one row per n.

Example:
    python scripts/rate_study.py channels/bec03.json --n 20 40 60 --trials 500
"""

import argparse
import sys

from gecot.harness import ExperimentConfig, run_campaign


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("channel", help="channel spec JSON path")
    parser.add_argument("--n", type=int, nargs="+", default=[20, 40, 60])
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=None)
    args = parser.parse_args()

    cfg = ExperimentConfig(
        channel=args.channel,
        n_grid=args.n,
        trials=args.trials,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    result = run_campaign(cfg)
    print(f"{'n':>6} {'k':>5} {'rate':>9} {'bound':>9} {'gap':>9} {'abort':>8} {'fail':>8}")
    for row in result.rate_report.rows:
        abort = f"{row.abort_rate:.4f}" if row.abort_rate is not None else "-"
        fail = f"{row.correctness_failure_rate:.4f}" if row.correctness_failure_rate is not None else "-"
        print(
            f"{row.n:>6} {row.k:>5} {row.rate:>9.4f} {row.bound:>9.4f} "
            f"{row.bound - row.rate:>9.4f} {abort:>8} {fail:>8}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
