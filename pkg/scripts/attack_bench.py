#!/usr/bin/env python3
"""Attack bench: run every implemented adversarial measurement at one
parameter point and print the reports.

Example:
    python scripts/attack_bench.py channels/bec03.json --n 20 --alpha 0.05 --trials 10000
"""

import argparse
import json
import math
import sys

import numpy as np

from gecot.adversary import (
    ALICE_STRATEGIES,
    attack_case1,
    attack_case2_entropy,
    attack_good_subset_fraction,
    bob_privacy_advantage,
)
from gecot.channel import capacity_solve, load_gec
from gecot.protocol import derive_params


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("channel")
    parser.add_argument("--n", type=int, default=20)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--eps", type=float, default=0.001)
    parser.add_argument("--gamma", type=float, default=0.001)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    gec = load_gec(args.channel)
    dist, stats = capacity_solve(gec.inner)
    params = derive_params(args.n, gec.erasure_prob, stats, args.alpha, args.eps, args.gamma)
    print(f"params: n={params.n} beta_n={params.beta_n} mu_n={params.mu_n} m={params.m_bits} k={params.k}")

    reports = [
        attack_case1(gec, dist, params, args.trials, np.random.default_rng([args.seed, 1])),
        attack_case2_entropy(
            gec, dist, params, args.trials, np.random.default_rng([args.seed, 2]),
            decode_other_attempts=min(args.trials, 200),
        ),
        attack_good_subset_fraction(
            params,
            u_r=math.ceil(2 * params.alpha * params.n),
            trials=args.trials,
            rng=np.random.default_rng([args.seed, 3]),
        ),
    ]
    for name, cls in ALICE_STRATEGIES.items():
        reports.append(
            bob_privacy_advantage(gec, dist, params, cls, args.trials, np.random.default_rng([args.seed, 4]))
        )
    for rep in reports:
        print(json.dumps(rep.to_json(), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
