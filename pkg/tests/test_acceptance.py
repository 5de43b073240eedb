"""Acceptance suite: one test per release criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria complete.  Every tolerance is pinned here; nothing is deferred to
later calibration.
"""

import itertools
import math
import time
from collections import Counter
from fractions import Fraction
from math import comb

import numpy as np
import pytest
import scipy.stats

from gecot.bits import bits_to_int, int_to_bits
from gecot.channel import GecSpec, bsc, capacity_solve, identity_dmc, uniform_input
from gecot.harness import ExperimentConfig, run_campaign
from gecot.interactive_hashing import ih_attack_both_in_set, ih_run, ih_security_params
from gecot.protocol import derive_params, run_session
from gecot.subset_codec import codec_params, decode_string, preimages, rank, unrank
from gecot.typicality import is_cond_typical, is_typical, typicality_bounds
from gecot.uhash import HashFunction, apply as hash_apply


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{criterion}: {detail}"


def h2(q: float) -> float:
    return -q * math.log2(q) - (1 - q) * math.log2(1 - q)


@pytest.fixture(scope="module")
def bec():
    gec = GecSpec(inner=identity_dmc(2), erasure_prob=0.3)
    dist, stats = capacity_solve(gec.inner)
    return gec, dist, stats


def test_criterion_1_capacity_solver():
    worst_err = 0.0
    worst_time = 0.0
    for q in (0.05, 0.1, 0.2):
        t0 = time.perf_counter()
        _, stats = capacity_solve(bsc(q))
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, abs(stats.capacity_bits - (1 - h2(q))))
    exact = True
    for k in (2, 4, 8):
        t0 = time.perf_counter()
        _, stats = capacity_solve(identity_dmc(k))
        worst_time = max(worst_time, time.perf_counter() - t0)
        exact = exact and stats.capacity_bits == math.log2(k)
    report(
        "criterion-1 capacity solver",
        worst_err < 1e-6 and exact and worst_time < 1.0,
        f"crossover err {worst_err:.2e}, noiseless exact {exact}, worst time {worst_time:.3f}s",
    )


def test_criterion_2_subset_codec_exhaustive():
    t_start = time.perf_counter()

    def colex(n, ell):
        return sorted(itertools.combinations(range(1, n + 1), ell), key=lambda s: tuple(reversed(s)))

    # full sweep at small universes plus the thin tails of larger ones;
    # every listed pair satisfies C(N, L) <= 1e5
    instances = [
        (n, ell) for n in range(1, 17) for ell in range(1, n + 1) if comb(n, ell) <= 100_000
    ]
    instances += [
        (n, ell)
        for n in range(17, 41)
        for ell in (1, 2, 3, n - 3, n - 2, n - 1)
        if 1 <= ell <= n and comb(n, ell) <= 100_000
    ]
    instances += [(100, 2), (1000, 1)]
    checked = 0
    for n, ell in sorted(set(instances)):
        params = codec_params(n, ell)
        for r, members in enumerate(colex(n, ell)):
            assert rank(params, members) == r
            assert unrank(params, r).members == members
            checked += 1

    # totality and preimage structure, exhaustive over every m-bit string
    preimage_ok = True
    for n, ell in [(4, 2), (10, 3), (14, 7), (18, 9)]:
        params = codec_params(n, ell)
        hits = Counter()
        for value in range(1 << params.m_bits):
            handle = decode_string(params, int_to_bits(value, params.m_bits))
            hits[handle.rank] += 1
        preimage_ok = preimage_ok and set(hits.values()) <= {1, 2}
        preimage_ok = preimage_ok and sum(hits.values()) == 1 << params.m_bits
        preimage_ok = preimage_ok and len(hits) == params.total
        for r in range(params.total):
            preimage_ok = preimage_ok and len(preimages(params, unrank(params, r))) == hits[r]
    elapsed = time.perf_counter() - t_start
    report(
        "criterion-2 subset codec",
        preimage_ok and elapsed < 10.0,
        f"{checked} round-trips, preimages partition ok {preimage_ok}, {elapsed:.1f}s",
    )


def test_criterion_3_universal_hashing():
    t_start = time.perf_counter()
    worst_rate = 0.0
    for in_bits in range(1, 7):
        inputs = np.array([[(v >> (in_bits - 1 - j)) & 1 for j in range(in_bits)] for v in range(1 << in_bits)])
        for out_bits in range(1, 4):
            if out_bits > in_bits:
                continue
            seed_len = in_bits + out_bits - 1
            # by linearity, the pair (x1, x2) collides exactly when the
            # matrix kills x1 xor x2, so one pass over nonzero differences
            # covers every distinct pair
            rates = np.zeros(1 << in_bits)
            for seed_val in range(1 << seed_len):
                seed = int_to_bits(seed_val, seed_len)
                matrix = np.array([seed[i : i + in_bits][::-1] for i in range(out_bits)])
                outs = (inputs @ matrix.T) % 2
                ints = outs @ (1 << np.arange(out_bits)[::-1])
                rates += ints == 0
            rates /= 1 << seed_len
            worst_rate = max(worst_rate, rates[1:].max() - 2.0**-out_bits)

    # exact leftover-hash check on 6-bit sources
    def exact_sd(source_values, out_bits):
        seed_len = 6 + out_bits - 1
        total = Fraction(0)
        uniform = Fraction(1, (1 << out_bits) * (1 << seed_len))
        for seed_val in range(1 << seed_len):
            h = HashFunction(in_bits=6, out_bits=out_bits, seed=int_to_bits(seed_val, seed_len))
            counts = Counter(bits_to_int(hash_apply(h, int_to_bits(v, 6))) for v in source_values)
            for out_val in range(1 << out_bits):
                p = Fraction(counts.get(out_val, 0), len(source_values) * (1 << seed_len))
                total += abs(p - uniform)
        return float(total / 2)

    rng = np.random.default_rng(2024)
    subset = sorted(int(v) for v in rng.choice(64, size=32, replace=False))
    sd_5 = exact_sd(subset, 1)  # min-entropy 5, one bit out: bound 1/8
    sd_6 = exact_sd(list(range(64)), 2)  # min-entropy 6, two bits out: bound 1/8
    elapsed = time.perf_counter() - t_start
    report(
        "criterion-3 universal hashing",
        worst_rate <= 1e-12 and sd_5 <= 0.125 and sd_6 <= 0.125 and elapsed < 60.0,
        f"collision excess {worst_rate:.2e}, exact SD {sd_5:.4f}/{sd_6:.4f} vs 0.125, {elapsed:.1f}s",
    )


def test_criterion_4_interactive_hashing():
    rng = np.random.default_rng(404)
    violations = 0
    runs = 0
    for m in (2, 4, 8, 12, 16):
        for _ in range(20_000):
            w = rng.integers(0, 2, size=m, dtype=np.uint8)
            _, outcome = ih_run(m, w, rng)
            runs += 1
            w0, w1 = bits_to_int(outcome.w0), bits_to_int(outcome.w1)
            if w0 >= w1 or bits_to_int(w) not in (w0, w1) or outcome.d is None:
                violations += 1

    # exact view equality over every kernel class at m <= 8
    class Scripted:
        def __init__(self, queries):
            self.queue = list(queries)

        def bytes(self, n):
            return self.queue.pop(0).to_bytes(n, "big")

    def orthogonal_basis(delta, m):
        pivot = delta.bit_length() - 1
        basis = []
        for i in range(m):
            if i == pivot:
                continue
            v = 1 << i
            if (delta >> i) & 1:
                v |= 1 << pivot
            basis.append(v)
        return basis

    exact_ok = True
    for m in range(2, 9):
        for delta in range(1, 1 << m):
            basis = orthogonal_basis(delta, m)
            for w in (0, (delta * 0x2545F491) % (1 << m)):
                t1, o1 = ih_run(m, int_to_bits(w, m), Scripted(basis))
                t2, o2 = ih_run(m, int_to_bits(w ^ delta, m), Scripted(basis))
                exact_ok = exact_ok and t1 == t2
                exact_ok = exact_ok and np.array_equal(o1.w0, o2.w0) and np.array_equal(o1.w1, o2.w1)
                exact_ok = exact_ok and {o1.d, o2.d} == {0, 1}

    # the uncontrolled output is exactly uniform: full enumeration of the
    # 42 admissible query sequences at m = 3
    kernel_counts = Counter()
    for q1 in range(1, 8):
        for q2 in range(1, 8):
            if q2 != q1:
                _, outcome = ih_run(3, int_to_bits(5, 3), Scripted([q1, q2]))
                kernel_counts[bits_to_int(outcome.w0) ^ bits_to_int(outcome.w1)] += 1
    uniform_ok = set(kernel_counts) == set(range(1, 8)) and len(set(kernel_counts.values())) == 1

    targets = [int(v) for v in rng.choice(1 << 12, size=64, replace=False)]
    est = ih_attack_both_in_set(12, targets, 10_000, rng)
    rho = ih_security_params(12, 6)[1]
    report(
        "criterion-4 interactive hashing",
        violations == 0 and exact_ok and uniform_ok and est.estimate <= rho,
        f"{runs} honest runs, {violations} violations, exact views {exact_ok}, "
        f"uniform {uniform_ok}, greedy {est.estimate:.4f} <= rho {rho:.4f}",
    )


def test_criterion_5_typicality_bounds():
    rng = np.random.default_rng(505)
    p = uniform_input(2)
    trials = 10_000
    ok = True
    details = []

    # plain typicality lower bound, one-sided binomial test at 1%
    for n in (64, 256):
        for eps in (0.05, 0.1):
            bound = typicality_bounds(p, n, eps).prob_lower
            hits = sum(is_typical(rng.integers(0, 2, size=n), p, eps) for _ in range(trials))
            pval = scipy.stats.binomtest(hits, trials, bound, alternative="less").pvalue if bound > 0 else 1.0
            ok = ok and pval > 0.01
            details.append(f"P1(n={n},eps={eps}):{hits / trials:.3f}>={bound:.3f}")

    # conditional typicality under a crossover channel
    w = bsc(0.1)
    for n in (64, 256):
        for eps in (0.05, 0.1):
            bound = typicality_bounds(w, n, eps).prob_lower
            hits = 0
            for _ in range(trials):
                x = rng.integers(0, 2, size=n)
                flips = rng.random(n) < 0.1
                y = np.where(flips, 1 - x, x)
                hits += is_cond_typical(y, x, w, eps)
            pval = scipy.stats.binomtest(hits, trials, bound, alternative="less").pvalue if bound > 0 else 1.0
            ok = ok and pval > 0.01

    # non-vacuous supplementary scale for the same bound
    n_big, eps_big = 2048, 0.1
    bound = typicality_bounds(p, n_big, eps_big).prob_lower
    hits = sum(is_typical(rng.integers(0, 2, size=n_big), p, eps_big) for _ in range(2000))
    ok = ok and bound > 0.99 and scipy.stats.binomtest(hits, 2000, bound, alternative="less").pvalue > 0.01

    # random restriction keeps the doubled radius: rare-flip channel where
    # the finite-length failure budget of 1% is actually attainable
    w_low = bsc(0.01)
    worst_fail = 0.0
    for n in (64, 256):
        for eps in (0.05, 0.1):
            for delta in (0.25, 0.5):
                n_a = int(delta * n)
                fails = 0
                used = 0
                for _ in range(trials):
                    x = rng.integers(0, 2, size=n)
                    flips = rng.random(n) < 0.01
                    y = np.where(flips, 1 - x, x)
                    if not is_cond_typical(y, x, w_low, eps):
                        continue
                    used += 1
                    subset = rng.choice(n, size=n_a, replace=False)
                    fails += not is_cond_typical(y[subset], x[subset], w_low, 2 * eps)
                rate = fails / used
                worst_fail = max(worst_fail, rate)
                ok = ok and rate <= 0.01
    # erasure-free inner channel: restrictions can never fail
    x = rng.integers(0, 2, size=256)
    ident_ok = all(
        is_cond_typical(x[s], x[s], identity_dmc(2), 0.1)
        for s in (rng.choice(256, size=64, replace=False) for _ in range(200))
    )
    ok = ok and ident_ok
    report(
        "criterion-5 typicality",
        ok,
        f"{'; '.join(details[:2])}...; worst restriction failure {worst_fail:.4f} <= 0.01",
    )


def test_criterion_6_end_to_end_correctness(bec):
    gec, dist, stats = bec
    params = derive_params(20, 0.3, stats, 0.05, 0.001, 0.001)
    t0 = time.perf_counter()
    trials = 1000
    completed = correct = 0
    for trial in range(trials):
        result = run_session(
            gec,
            dist,
            params,
            np.random.default_rng([606, trial, 0]),
            np.random.default_rng([606, trial, 1]),
        )
        if result.completed:
            completed += 1
            correct += result.correct
    elapsed = time.perf_counter() - t0
    # the non-completion rate is forced by the channel: fewer than 13 good
    # positions out of Bin(20, 0.7) aborts, so correctness is judged over
    # completed sessions and the abort mass is checked against that law
    p_abort = float(scipy.stats.binom.cdf(12, 20, 0.7))
    abort_consistent = (
        scipy.stats.binomtest(trials - completed, trials, p_abort).pvalue > 0.001
    )
    rate = correct / completed
    report(
        "criterion-6 end-to-end correctness",
        rate >= 0.99 and abort_consistent and elapsed < 300.0,
        f"{correct}/{completed} completed sessions correct ({rate:.4f}), "
        f"abort rate {(trials - completed) / trials:.3f} ~ binomial {p_abort:.3f}, {elapsed:.1f}s",
    )


def test_criterion_7_rate_trend(bec, tmp_path):
    import json

    gec, _, stats = bec
    channel_path = tmp_path / "bec.json"
    channel_path.write_text(json.dumps({"inner": [[1.0, 0.0], [0.0, 1.0]], "p_star": 0.3}))
    cfg = ExperimentConfig(channel=str(channel_path), n_grid=[20, 40, 60], trials=200, seed=7)
    result = run_campaign(cfg)
    rows = result.rate_report.rows
    rates = [r.rate for r in rows]
    bound = rows[0].bound
    increasing = all(a < b for a, b in zip(rates, rates[1:]))
    close_enough = rates[-1] >= 0.5 * bound - 1e-9
    all_correct = all(
        r.correctness_failure_rate in (None, 0.0) or r.correctness_failure_rate < 0.05 for r in rows
    )
    report(
        "criterion-7 rate trend",
        increasing and close_enough and abs(bound - 0.3) < 1e-6 and all_correct,
        f"rates {rates} increasing toward bound {bound:.3f}; n=60 within 50%",
    )


def _tiny_view_distribution(c: int) -> dict:
    """Fraction-exact distribution of the sender's view for one choice bit.

    Four positions, four input symbols, erasure-free inner channel with
    p_star = 1/5; completion requires zero erasures and the one-bit subset
    encoding makes the checked slot equal the encoded bit.
    """
    dist: dict = {}

    def add(key, weight):
        dist[key] = dist.get(key, Fraction(0)) + weight

    p_e = Fraction(1, 5)
    for x_val in range(256):
        xs = tuple((x_val >> (2 * i)) & 3 for i in range(4))
        w_x = Fraction(1, 256)
        for e_mask in range(16):
            n_e = bin(e_mask).count("1")
            w_e = p_e**n_e * (1 - p_e) ** (4 - n_e)
            if n_e >= 1:  # fewer than ceil(3.16) good positions: abort
                add(("abort", xs), w_x * w_e)
                continue
            for w_bit in range(2):
                for r_c in itertools.permutations(range(4), 2):
                    rest = [p for p in range(4) if p not in r_c]
                    for fill_idx in range(2):
                        weight = w_x * w_e * Fraction(1, 2) * Fraction(1, 12) * Fraction(1, 2)
                        r_other = [0, 0]
                        r_other[w_bit] = rest[fill_idx]
                        r_other[1 - w_bit] = rest[1 - fill_idx]
                        a = w_bit ^ c  # d equals the encoded bit here
                        r0, r1 = (r_c, tuple(r_other)) if c == 0 else (tuple(r_other), r_c)
                        block0 = xs[r0[1 - a]]
                        block1 = xs[r1[a]]
                        add((xs, r0, r1, a, block0, block1), weight)
    return dist


def test_criterion_8_security_for_bob(bec):
    # exact part: the sender's view distribution is identical under both
    # choices, by full enumeration of a four-position instance
    d0 = _tiny_view_distribution(0)
    d1 = _tiny_view_distribution(1)
    exact_equal = d0 == d1 and sum(d0.values()) == 1
    # the enumerated instance is a real parameter point of the protocol
    _, stats4 = capacity_solve(identity_dmc(4))
    params4 = derive_params(4, 0.2, stats4, 0.01, 0.01, 0.01)
    instance_ok = (params4.beta_n, params4.mu_n, params4.m_bits, params4.k) == (1, 1, 1, 1)

    # sampled part: an observing sender strategy cannot beat a coin flip
    gec, dist, stats = bec
    params = derive_params(20, 0.3, stats, 0.05, 0.001, 0.001)
    from gecot.adversary import IhParityAlice, bob_privacy_advantage

    rep = bob_privacy_advantage(gec, dist, params, IhParityAlice, 10_000, np.random.default_rng(808))
    interval_ok = rep.ci_low <= 0.5 <= rep.ci_high
    report(
        "criterion-8 security for receiver",
        exact_equal and instance_ok and interval_ok,
        f"exact tiny views equal {exact_equal} ({len(d0)} atoms), "
        f"advantage {rep.details['advantage']:.4f}, interval [{rep.ci_low:.3f}, {rep.ci_high:.3f}] covers 1/2",
    )


def test_criterion_9_security_for_alice(bec):
    gec, dist, stats = bec
    from gecot.adversary import (
        attack_case1,
        attack_case2_entropy,
        attack_good_subset_fraction,
    )

    # spreading receiver stays under the ceiling at every block length
    estimates = {}
    bound_ok = True
    for n in (12, 16, 20):
        params_n = derive_params(n, 0.3, stats, 0.05, 0.001, 0.001)
        rep = attack_case1(gec, dist, params_n, 10_000, np.random.default_rng([909, n]))
        estimates[n] = rep.estimate
        bound_ok = bound_ok and rep.estimate <= rep.details["four_times_bound"]
    trend_ok = estimates[12] + 0.02 >= estimates[16] >= estimates[20] - 0.02

    # check-subset fraction ceiling, exhaustively, strict on every instance
    fraction_ok = True
    for n, u_r in ((20, 2), (40, 4), (40, 6)):
        params_n = derive_params(n, 0.3, stats, 0.05, 0.001, 0.001)
        rep = attack_good_subset_fraction(params_n, u_r=u_r, exhaustive=True)
        fraction_ok = fraction_ok and rep.details["subset_fraction"] < rep.reference_bound
        fraction_ok = (
            fraction_ok
            and rep.details["string_fraction"] <= 2 * rep.details["subset_fraction"] + 1e-12
        )
    params20 = derive_params(20, 0.3, stats, 0.05, 0.001, 0.001)
    rep_empty = attack_good_subset_fraction(params20, u_r=10, exhaustive=True)
    fraction_ok = fraction_ok and rep_empty.details["subset_fraction"] == 0.0

    # hoarding receiver: erasure bookkeeping holds in every checked trial
    rep2 = attack_case2_entropy(gec, dist, params20, 10_000, np.random.default_rng(910))
    structural_ok = rep2.details["structural_violations"] == 0 and rep2.details["structural_checked"] > 1000
    report(
        "criterion-9 security for sender",
        bound_ok and trend_ok and fraction_ok and structural_ok,
        f"spread success {estimates} under 4x ceiling, trend ok {trend_ok}, "
        f"fractions strict {fraction_ok}, bookkeeping {rep2.details['structural_checked']} checked / "
        f"{rep2.details['structural_violations']} violations",
    )


def test_criterion_10_determinism(tmp_path):
    import json
    import os

    channel_path = tmp_path / "bec.json"
    channel_path.write_text(json.dumps({"inner": [[1.0, 0.0], [0.0, 1.0]], "p_star": 0.3}))
    blobs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        cfg = ExperimentConfig(
            channel=str(channel_path),
            n_grid=[20],
            trials=30,
            seed=1234,
            out_dir=str(out_dir),
            write_transcripts=True,
        )
        run_campaign(cfg)
        blob = {}
        for root, _, files in os.walk(out_dir):
            for f in files:
                rel = os.path.relpath(os.path.join(root, f), out_dir)
                blob[rel] = open(os.path.join(root, f), "rb").read()
        blobs.append(blob)
    same_names = blobs[0].keys() == blobs[1].keys()
    same_bytes = same_names and all(blobs[0][k] == blobs[1][k] for k in blobs[0])
    report(
        "criterion-10 determinism",
        same_bytes,
        f"{len(blobs[0])} files byte-identical across two seeded runs",
    )
