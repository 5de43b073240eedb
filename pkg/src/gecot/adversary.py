"""Malicious strategies and the measurements behind the security claims.

Attacks plug into :func:`gecot.protocol.run_session` as replacement party
state machines.  Every estimate ships as an :class:`AttackReport` with a
95% Wilson interval and, where one exists, the closed-form reference value
at the same parameters.  Strategies must emit schema-valid messages or the
session ends in a recorded abort; the bench never crashes on adversarial
input.

Implemented measurements:

* greedy receiver spreading erasures over both halves and guessing the
  checked erased values from the channel's output marginal (the best
  memoryless guess);
* hoarding receiver that keeps an erasure-free half for itself, forcing
  the other requested block to carry almost all erasures, plus the
  residual min-entropy bookkeeping this implies;
* exhaustive/sampled fraction of check subsets that would let a cheater
  pass, against the ``(1 - 2*alpha)**(alpha*n)`` ceiling;
* distinguishing advantage of curious-sender strategies on the receiver's
  choice bit, the measurable face of receiver privacy;
* exact statistical information of small joint distributions.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from . import subset_codec
from .channel import GecSpec, InputDistribution
from .interactive_hashing import ih_security_params, solve_transcript
from .protocol import (
    HonestAlice,
    HonestBob,
    ProtocolParams,
    good_bad_split,
    restrict,
    run_session,
    subset_slots,
    without_slots,
)
from .stats import wilson_interval
from .wire import CheckAnnounce, IhQueryMsg, IhResponseMsg, SetsAnnounce


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class AttackReport:
    """One strategy's measured success with its reference value."""

    strategy: str
    trials: int
    applicable: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    reference_bound: float | None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _report(strategy, trials, applicable, successes, reference, details) -> AttackReport:
    lo, hi = wilson_interval(successes, applicable) if applicable else (0.0, 1.0)
    return AttackReport(
        strategy=strategy,
        trials=trials,
        applicable=applicable,
        successes=successes,
        estimate=successes / applicable if applicable else 0.0,
        ci_low=lo,
        ci_high=hi,
        reference_bound=reference,
        details=details,
    )


class Case1Bob(HonestBob):
    """Spread erasures over both halves, then guess the checked ones.

    Both announced lists carry at least ``2*alpha*n`` erasures, arranged
    away from the slots of the receiver's own check subset; after the
    interactive hashing the routing bit is chosen to minimize the number of
    erased checked positions, whose values are guessed from the output
    marginal of the inner channel.
    """

    name = "case1_spread"

    def __init__(self, gec, params, rng, input_dist: InputDistribution):
        super().__init__(gec, params, rng, choice=0)
        self.applicable = False
        self.guessed = 0
        marginal = np.asarray(input_dist.probs, dtype=float) @ np.asarray(gec.inner.transition, dtype=float)
        self.marginal = marginal / marginal.sum()

    def receive(self, y) -> bool:
        self.y = np.asarray(y, dtype=np.int64)
        self.good, self.bad, _ = good_bad_split(self.y, self.gec.erasure_symbol, self.params)
        return False  # a malicious receiver never gives up this early

    def _arrange(self, erased: list[int], goods: list[int], tslots: set[int]) -> tuple[int, ...]:
        half = self.params.n // 2
        e, g = list(erased), list(goods)
        out = [0] * half
        for i in [i for i in range(half) if i not in tslots]:
            out[i] = e.pop() if e else g.pop()
        for i in sorted(tslots):
            out[i] = g.pop() if g else e.pop()
        return tuple(out)

    def partition(self) -> SetsAnnounce:
        p = self.params
        half = p.n // 2
        b = len(self.bad)
        u0, u1 = b // 2, b - b // 2
        need = 2 * p.alpha * p.n
        self.applicable = b >= 4 * p.alpha * p.n - 1e-9 and min(u0, u1) >= need - 1e-9 and max(u0, u1) <= half
        self.w = self.rng.integers(0, 2, size=p.m_bits, dtype=np.uint8)
        self.t_handle = subset_codec.decode_string(self.codec, self.w)
        tslots = set(subset_slots(self.t_handle))
        bad_perm = [int(v) for v in self.rng.permutation(self.bad)] if self.bad else []
        good_perm = [int(v) for v in self.rng.permutation(self.good)]
        if max(u0, u1) > half:  # degenerate: not enough room, fall back to all-in-one
            u0, u1 = min(b, half), b - min(b, half)
        self.r0 = self._arrange(bad_perm[:u0], good_perm[: half - u0], tslots)
        self.r1 = self._arrange(bad_perm[u0:], good_perm[half - u0 :], tslots)
        return SetsAnnounce(r0=self.r0, r1=self.r1)

    def announce(self, outcome, t0, t1) -> CheckAnnounce:
        erased = set(self.bad)

        def checked(a: int) -> tuple[list[int], list[int]]:
            s_r0 = subset_slots(t1 if a == 0 else t0)
            s_r1 = subset_slots(t0 if a == 0 else t1)
            return restrict(self.r0, s_r0), restrict(self.r1, s_r1)

        def cost(a: int) -> int:
            c0, c1 = checked(a)
            return sum(1 for v in c0 + c1 if v in erased)

        a = 0 if cost(0) <= cost(1) else 1
        self.guessed = cost(a)
        pos_r0, pos_r1 = checked(a)

        def block(positions: list[int]) -> tuple[int, ...]:
            vals = []
            for pos in positions:
                if pos in erased:
                    vals.append(int(self.rng.choice(len(self.marginal), p=self.marginal)))
                else:
                    vals.append(int(self.y[pos]))
            return tuple(vals)

        return CheckAnnounce(a=a, y_r0=block(pos_r0), y_r1=block(pos_r1))


def case1_reference_bound(params: ProtocolParams) -> float:
    """Success ceiling 2**(-alpha*n*(C - 2*eps)) for the spreading receiver."""
    return 2.0 ** (-params.alpha * params.n * (params.capacity_bits - 2 * params.eps_typ))


def case1_ih_sizing(params: ProtocolParams) -> tuple[float, float]:
    """Hashing-security sizing behind the spreading attack.

    At most a ``4*(1-2*alpha)**(alpha*n)`` fraction of encoding strings
    decodes to a subset that passes for either half, so the relevant target
    set has log-size ``s = m + alpha*n*log2(1-2*alpha) + 2``; returns s and
    the calibrated steering ceiling at that size (1.0 when s is not below
    m, the vacuous regime of small block lengths).
    """
    s = params.m_bits + params.alpha * params.n * math.log2(1 - 2 * params.alpha) + 2
    s_int = math.ceil(s)
    if 0 <= s_int < params.m_bits:
        rho = ih_security_params(params.m_bits, s_int)[1]
    else:
        rho = 1.0
    return s, rho


def attack_case1(
    gec: GecSpec,
    input_dist: InputDistribution,
    params: ProtocolParams,
    trials: int,
    rng: np.random.Generator,
) -> AttackReport:
    """Measure the spreading receiver's chance of passing the value check.

    Trials whose erasure draw cannot give both halves ``2*alpha*n``
    erasures are recorded as non-applicable and excluded from the estimate.
    Success means the sender accepted at the checking step.
    """
    applicable = 0
    successes = 0
    guessed_total = 0
    for _ in range(trials):
        bob = Case1Bob(gec, params, rng, input_dist)
        result = run_session(gec, input_dist, params, rng, rng, bob=bob, decode_mode="genie")
        if not bob.applicable:
            continue
        applicable += 1
        guessed_total += bob.guessed
        if result.completed:
            successes += 1
    bound = case1_reference_bound(params)
    s, rho = case1_ih_sizing(params)
    return _report(
        Case1Bob.name,
        trials,
        applicable,
        successes,
        bound,
        {
            "four_times_bound": 4 * bound,
            "non_applicable": trials - applicable,
            "mean_guessed_positions": guessed_total / applicable if applicable else None,
            "n": params.n,
            "alpha": params.alpha,
            "ih_set_log_size": s,
            "ih_rho": rho,
        },
    )


class Case2Bob(HonestBob):
    """Keep an erasure-free half, pushing every erasure into the other one.

    Structurally this is the honest partition with choice 0 made
    deterministic: the receiver's own half never contains erasures, so all
    of them land in the unchecked remainder of the other half, which is
    what caps what he can learn about the second string.
    """

    name = "case2_hoard"

    def __init__(self, gec, params, rng):
        super().__init__(gec, params, rng, choice=0)

    def u_counts(self, a: int, t0, t1) -> dict:
        erased = set(self.bad)
        slots_r1 = subset_slots(t0 if a == 0 else t1)
        q1 = without_slots(self.r1, slots_r1)
        return {
            "u_r0": sum(1 for v in self.r0 if v in erased),
            "u_r1_checked": sum(1 for v in restrict(self.r1, slots_r1) if v in erased),
            "u_q1": sum(1 for v in q1 if v in erased),
            "bad_count": len(self.bad),
        }

    def attempt_other_decode(self, a: int, t0, t1) -> tuple[int, np.ndarray | None]:
        """Try to also recover the string the receiver did not ask for.

        Enumerates every input block consistent (at the doubled radius) with
        the non-erased part of the other half's unchecked remainder and
        matching its reconciliation hash.  Returns the survivor count and,
        when unique, the h-hash of the survivor.
        """
        import itertools

        from . import typicality, uhash

        msg = self.strings_msg
        slots_r1 = subset_slots(t0 if a == 0 else t1)
        q1 = without_slots(self.r1, slots_r1)
        known = [i for i, pos in enumerate(q1) if pos not in set(self.bad)]
        y_known = np.asarray([self.y[q1[i]] for i in known], dtype=np.int64)
        alphabet = self.gec.inner.input_alphabet_size
        g1, h1 = msg.g1.to_hash(), msg.h1.to_hash()
        g1_val = np.asarray(msg.g1_value, dtype=np.uint8)
        survivors = []
        for cand in itertools.product(range(alphabet), repeat=len(q1)):
            x_cand = np.array(cand, dtype=np.int64)
            if not typicality.is_cond_typical(y_known, x_cand[known], self.gec.inner, 2 * self.params.eps_typ):
                continue
            if not np.array_equal(uhash.apply(g1, uhash.serialize_symbols(x_cand, alphabet)), g1_val):
                continue
            survivors.append(x_cand)
            if len(survivors) > 1:
                break
        if len(survivors) == 1:
            return 1, uhash.apply(h1, uhash.serialize_symbols(survivors[0], alphabet))
        return len(survivors), None


def min_entropy_budget(params: ProtocolParams) -> dict:
    """Residual min-entropy accounting for the hoarding receiver.

    After the reconciliation hash leaks ``g_len`` bits, at least
    ``(mu - 5*alpha)*n*H(X) - g_len`` bits of min-entropy about the other
    block remain; extracting k bits is within ``eps`` of uniform when
    ``k <= budget - 2*log2(1/eps) + 2``, so the implied distance level is
    ``2**(-(budget - k + 2)/2)``.
    """
    budget = (params.mu - 5 * params.alpha) * params.n * params.h_x - params.g_len
    implied_eps = 2.0 ** (-(budget - params.k + 2) / 2)
    return {
        "min_entropy_budget": budget,
        "k": params.k,
        "g_len": params.g_len,
        "implied_eps_sec": implied_eps,
        "lemma_consistent": params.k <= budget + 2,
    }


def attack_case2_entropy(
    gec: GecSpec,
    input_dist: InputDistribution,
    params: ProtocolParams,
    trials: int,
    rng: np.random.Generator,
    *,
    decode_other_attempts: int = 0,
) -> AttackReport:
    """Run the hoarding receiver and verify the erasure bookkeeping.

    In every accepted trial satisfying the case hypotheses (strictly more
    than ``(p_star - alpha)*n`` erasures overall and a check subset that is
    good for the second half), the unchecked remainder of the second half
    must contain at least ``(p_star - 4*alpha)*n`` erasures.  The report
    also carries the closed-form min-entropy budget at these parameters
    and, when ``decode_other_attempts`` is positive, how often the first
    that many accepted trials pinned down the other string exactly.
    """
    applicable = 0
    successes = 0
    checked = 0
    violations = 0
    other_attempts = 0
    other_unique = 0
    other_correct = 0
    for _ in range(trials):
        bob = Case2Bob(gec, params, rng)
        result = run_session(gec, input_dist, params, rng, rng, bob=bob, decode_mode="genie")
        if result.aborted_step == 3:
            continue
        applicable += 1
        if not result.completed:
            continue
        successes += 1
        check_msg = next(e.message for e in result.transcript if isinstance(e.message, CheckAnnounce))
        ih_msgs = [e.message for e in result.transcript if isinstance(e.message, (IhQueryMsg, IhResponseMsg))]
        t0, t1 = _decoded_outputs(params, ih_msgs)
        counts = bob.u_counts(check_msg.a, t0, t1)
        side_ok = (
            counts["bad_count"] > (params.p_star - params.alpha) * params.n + 1e-9
            and counts["u_r1_checked"] < params.alpha * params.n - 1e-9
            and counts["u_r0"] < 2 * params.alpha * params.n - 1e-9
        )
        if side_ok:
            checked += 1
            if counts["u_q1"] < (params.p_star - 4 * params.alpha) * params.n - 1e-9:
                violations += 1
        if other_attempts < decode_other_attempts:
            other_attempts += 1
            count, value = bob.attempt_other_decode(check_msg.a, t0, t1)
            if count == 1:
                other_unique += 1
                other_correct += tuple(int(b) for b in value) == result.s1
    details = min_entropy_budget(params)
    details.update({"structural_checked": checked, "structural_violations": violations})
    if decode_other_attempts:
        details.update(
            {
                "other_decode_attempts": other_attempts,
                "other_decode_unique": other_unique,
                "other_decode_correct": other_correct,
            }
        )
    return _report(Case2Bob.name, trials, applicable, successes, None, details)


def _decoded_outputs(params: ProtocolParams, ih_msgs) -> tuple:
    from .interactive_hashing import IhTranscript

    queries = []
    responses = []
    for msg in ih_msgs:
        if isinstance(msg, IhQueryMsg):
            value = 0
            for bit in msg.bits:
                value = (value << 1) | bit
            queries.append(value)
        else:
            responses.append(msg.bit)
    transcript = IhTranscript(m_bits=params.m_bits, queries=tuple(queries), responses=tuple(responses))
    w0, w1 = solve_transcript(transcript)
    codec = subset_codec.codec_params(params.n // 2, params.beta_n)
    return subset_codec.unrank(codec, w0 % codec.total), subset_codec.unrank(codec, w1 % codec.total)


def good_fraction_bound(alpha: float, n: int) -> float:
    return (1 - 2 * alpha) ** (alpha * n)


def attack_good_subset_fraction(
    params: ProtocolParams,
    u_r: int,
    trials: int | None = None,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
) -> AttackReport:
    """Fraction of check subsets (and of encoding strings) that let a half
    with ``u_r`` erasures pass the check.

    A subset is good for the half when it hits strictly fewer than
    ``alpha*n`` of its erased slots.  By exchangeability only the erased
    slot count matters, so the erased slots are fixed to the first ``u_r``.
    Exhaustive mode enumerates all subsets and all strings; otherwise both
    are sampled ``trials`` times.  The string-level fraction can exceed the
    subset-level one by at most the factor 2 preimage multiplicity.
    """
    half = params.n // 2
    ell = params.beta_n
    codec = subset_codec.codec_params(half, ell)
    threshold = params.alpha * params.n

    def is_good(members: tuple[int, ...]) -> bool:
        # members are 1-based; erased slots are 1..u_r
        return sum(1 for m in members if m <= u_r) < threshold - 1e-12

    if exhaustive:
        good_subsets = sum(1 for members in combinations(range(1, half + 1), ell) if is_good(members))
        total_subsets = codec.total
        good_strings = 0
        total_strings = 1 << codec.m_bits
        for value in range(total_strings):
            handle = subset_codec.unrank(codec, value % codec.total)
            if is_good(handle.members):
                good_strings += 1
    else:
        if rng is None or trials is None:
            raise ValueError("sampled mode needs trials and rng")
        total_subsets = trials
        good_subsets = 0
        for _ in range(trials):
            members = tuple(sorted(int(v) + 1 for v in rng.choice(half, size=ell, replace=False)))
            good_subsets += is_good(members)
        total_strings = trials
        good_strings = 0
        for _ in range(trials):
            value = int(rng.integers(0, 1 << codec.m_bits))
            handle = subset_codec.unrank(codec, value % codec.total)
            good_strings += is_good(handle.members)

    bound = good_fraction_bound(params.alpha, params.n)
    subset_fraction = good_subsets / total_subsets
    string_fraction = good_strings / total_strings
    return _report(
        "good_subset_fraction",
        total_subsets,
        total_subsets,
        good_subsets,
        bound,
        {
            "subset_fraction": subset_fraction,
            "string_fraction": string_fraction,
            "string_total": total_strings,
            "string_good": good_strings,
            "two_set_string_bound": 4 * bound,
            "u_r": u_r,
            "exhaustive": exhaustive,
        },
    )


class IndifferentAlice(HonestAlice):
    """Curious sender who ignores the transcript entirely."""

    name = "indifferent"

    def guess_choice(self, transcript) -> int:
        return 0


class IhParityAlice(HonestAlice):
    """Curious sender guessing from the hashing outputs and the routing bit."""

    name = "ih_parity"

    def guess_choice(self, transcript) -> int:
        a = None
        queries: list[int] = []
        responses: list[int] = []
        for entry in transcript:
            msg = entry.message
            if isinstance(msg, CheckAnnounce):
                a = msg.a
            elif isinstance(msg, IhQueryMsg):
                value = 0
                for bit in msg.bits:
                    value = (value << 1) | bit
                queries.append(value)
            elif isinstance(msg, IhResponseMsg):
                responses.append(msg.bit)
        if a is None:
            return 0
        from .interactive_hashing import IhTranscript

        transcript_ih = IhTranscript(m_bits=self.params.m_bits, queries=tuple(queries), responses=tuple(responses))
        w0, _ = solve_transcript(transcript_ih)
        return a ^ (w0 & 1)


class SetSumAlice(HonestAlice):
    """Curious sender guessing from a statistic of the announced lists."""

    name = "set_sum"

    def guess_choice(self, transcript) -> int:
        for entry in transcript:
            if isinstance(entry.message, SetsAnnounce):
                return 1 if sum(entry.message.r0) > sum(entry.message.r1) else 0
        return 0


ALICE_STRATEGIES = {cls.name: cls for cls in (IndifferentAlice, IhParityAlice, SetSumAlice)}


def bob_privacy_advantage(
    gec: GecSpec,
    input_dist: InputDistribution,
    params: ProtocolParams,
    alice_cls: type[HonestAlice],
    trials: int,
    rng: np.random.Generator,
) -> AttackReport:
    """Distinguishing advantage of a curious sender on the choice bit.

    The sender follows the protocol and afterwards guesses the choice bit
    from her view; the report carries |Pr[guess = c] - 1/2| with a Wilson
    interval on the hit rate.  The advantage lower-bounds the statistical
    distance between her views under the two choices, which is the
    quantity receiver privacy is about; it is reported as a bound on the
    distinguishing advantage only.
    """
    hits = 0
    for _ in range(trials):
        c = int(rng.integers(0, 2))
        alice = alice_cls(gec, input_dist, params, rng)
        result = run_session(gec, input_dist, params, rng, rng, bob_choice=c, alice=alice, decode_mode="genie")
        guess = alice.guess_choice(result.transcript)
        if guess is None:
            guess = 0
        if guess == c:
            hits += 1
    lo, hi = wilson_interval(hits, trials)
    return AttackReport(
        strategy=f"privacy_{getattr(alice_cls, 'name', alice_cls.__name__)}",
        trials=trials,
        applicable=trials,
        successes=hits,
        estimate=hits / trials if trials else 0.0,
        ci_low=lo,
        ci_high=hi,
        reference_bound=0.5,
        details={
            "advantage": abs(hits / trials - 0.5) if trials else 0.0,
            "note": "advantage lower-bounds the view statistical distance",
        },
    )


def istat_exact_tiny(joint: np.ndarray) -> float:
    """Exact statistical information of a fully enumerated joint distribution.

    ``joint`` has axes (x, y, z); a 2-D array is treated as having a
    single z value.  Computes the statistical distance between the joint
    and the product of its conditional marginals given z.
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim == 2:
        joint = joint[:, :, None]
    if joint.ndim != 3:
        raise ValueError("expected axes (x, y, z)")
    if joint.size > 1 << 20:
        raise TooLarge(f"{joint.size} atoms exceed the exact-computation limit")
    if abs(joint.sum() - 1.0) > 1e-9 or np.any(joint < 0):
        raise ValueError("not a probability distribution")
    pz = joint.sum(axis=(0, 1))
    surrogate = np.zeros_like(joint)
    for z in range(joint.shape[2]):
        if pz[z] == 0:
            continue
        px = joint[:, :, z].sum(axis=1) / pz[z]
        py = joint[:, :, z].sum(axis=0) / pz[z]
        surrogate[:, :, z] = pz[z] * np.outer(px, py)
    return 0.5 * float(np.abs(joint - surrogate).sum())
