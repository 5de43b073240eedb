"""Honest-party state machines and session driver for the erasure-channel OT.

One session runs eight steps between Alice (sender) and Bob (receiver) over
a generalized erasure channel with erasure probability below one half, plus
a noiseless message channel:

1. Parameter setting: a positive constant ``alpha`` with
   ``3*alpha < 1/2 - p_star`` fixes ``beta = 1/2 - p_star - alpha`` and
   ``mu = p_star + alpha`` (both integrality-adjusted here).
2. Alice samples ``x`` of length n from the capacity-achieving input
   distribution of the inner channel and transmits it.
3. Bob splits positions into good (non-erased) and bad; he aborts when
   fewer than ``(1 - p_star - alpha) * n`` are good.
4. Bob draws a choice bit c and an m-bit string w, decodes w into a check
   subset T of ``beta*n`` out of ``n/2`` slot indices, and announces an
   ordered partition (R0, R1) of the positions: R_c is a random half drawn
   from the good positions; the other list carries good positions at the
   T-indexed slots and the remaining unused positions elsewhere.  The lists
   are ordered: slot indices refer to announcement order, which is what
   lets an honest Bob steer his good positions into the slots that will be
   checked.  Alice rejects any repeated position.
5. Interactive hashing maps w to two public strings w0, w1 (subsets T0,
   T1); d indexes Bob's own string.
6. Bob announces ``a = d XOR c`` and the received values on R0's T_(1-a)
   slots and R1's T_a slots; Alice accepts only if both announced blocks
   are conditionally 2*eps-typical with her input under the inner channel.
7. Alice hashes the unchecked remainders Q0, Q1 (``mu*n`` positions each)
   with fresh 2-universal functions: short g-hashes for reconciliation and
   k-bit h-hashes whose outputs S0, S1 are her OT outputs.
8. Bob reconstructs the Q_c block from his erasure-free view, keeps the
   candidates matching the g-hash, and outputs the h-hash of the unique
   survivor, or the all-zero string if the survivor is not unique.  Bob
   never aborts here, so Alice cannot mount reaction attacks.

Every random draw comes from an explicitly passed generator and every
message is recorded, so sessions replay bit-identically from seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import subset_codec, typicality, uhash
from .channel import ChannelStats, GecSpec, InputDistribution, transmit
from .interactive_hashing import IhOutcome, MalformedResponse, ih_run
from .wire import (
    AbortMsg,
    CheckAnnounce,
    HashDescriptor,
    IhQueryMsg,
    IhResponseMsg,
    SetsAnnounce,
    StringsMsg,
    Transcript,
)

# Guard added to strict threshold comparisons so that float rounding of
# products like (1 - p_star - alpha) * n cannot flip an exact boundary.
_EDGE = 1e-9


class ParamViolation(ValueError):
    pass


class RateNonpositive(ValueError):
    pass


class InfeasibleSplit(RuntimeError):
    pass


class RepeatedPosition(ValueError):
    pass


class BadSize(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    """Derived constants of one protocol configuration.

    ``beta_n`` is floored to an integer and ``beta``/``mu`` recomputed from
    it, so ``beta_n + mu_n == n/2`` exactly.  ``g_len`` rounds the
    reconciliation-hash length up (more leakage: conservative) and ``k``
    rounds the extracted length down.
    """

    n: int
    p_star: float
    alpha: float
    eps_typ: float
    gamma: float
    beta: float
    beta_n: int
    mu: float
    mu_n: int
    m_bits: int
    g_len: int
    k: int
    h_x: float
    h_x_given_y0: float
    capacity_bits: float

    @property
    def rate(self) -> float:
        return self.k / self.n


def derive_params(
    n: int,
    p_star: float,
    stats: ChannelStats,
    alpha: float,
    eps_typ: float,
    gamma: float,
) -> ProtocolParams:
    """Resolve all derived constants, enforcing the feasibility constraints.

    Raises :class:`ParamViolation` when ``3*alpha`` is not strictly below
    ``1/2 - p_star`` (which also guarantees ``beta > 2*alpha``), when n is
    odd, or when the rounded check subset would be empty; raises
    :class:`RateNonpositive` when fewer than one output bit survives.
    """
    if n < 2 or n % 2:
        raise ParamViolation(f"block length must be even and positive, got {n}")
    if alpha <= 0 or eps_typ <= 0 or gamma <= 0:
        raise ParamViolation("alpha, eps_typ and gamma must be positive")
    if not 3 * alpha < 0.5 - p_star:
        raise ParamViolation(f"3*alpha = {3 * alpha} must be < 1/2 - p_star = {0.5 - p_star}")
    beta_real = 0.5 - p_star - alpha
    beta_n = int(math.floor(beta_real * n + _EDGE))
    if beta_n < 1:
        raise ParamViolation(f"beta*n rounds to zero at n={n}; increase n")
    mu_n = n // 2 - beta_n
    beta = beta_n / n
    mu = mu_n / n
    m_bits = subset_codec.codec_params(n // 2, beta_n).m_bits
    g_len = max(1, math.ceil(mu_n * (stats.h_x_given_y0 + eps_typ) - _EDGE))
    delta = (mu - 5 * alpha) * stats.h_x - mu * (stats.h_x_given_y0 + eps_typ) - gamma
    k = int(math.floor(delta * n + _EDGE))
    if k < 1:
        raise RateNonpositive(f"extracted length {delta * n:.3f} rounds below 1 bit")
    return ProtocolParams(
        n=n,
        p_star=p_star,
        alpha=alpha,
        eps_typ=eps_typ,
        gamma=gamma,
        beta=beta,
        beta_n=beta_n,
        mu=mu,
        mu_n=mu_n,
        m_bits=m_bits,
        g_len=g_len,
        k=k,
        h_x=stats.h_x,
        h_x_given_y0=stats.h_x_given_y0,
        capacity_bits=stats.capacity_bits,
    )


def good_bad_split(y: np.ndarray, erasure_symbol: int, params: ProtocolParams) -> tuple[list[int], list[int], bool]:
    """Split received positions into good/bad and decide the step-3 abort.

    The abort fires exactly when the good count is strictly below
    ``(1 - p_star - alpha) * n``; the kept boundary guarantees that an
    honest partition (n/2 + beta_n good positions) is always feasible.
    """
    good = [i for i, v in enumerate(y) if v != erasure_symbol]
    bad = [i for i, v in enumerate(y) if v == erasure_symbol]
    threshold = (1.0 - params.p_star - params.alpha) * params.n
    return good, bad, len(good) < threshold - _EDGE


def subset_slots(handle: subset_codec.SubsetHandle) -> list[int]:
    """0-based slot indices of a decoded check subset."""
    return [m - 1 for m in handle.members]


def restrict(seq, slots: list[int]) -> list[int]:
    return [seq[i] for i in slots]


def without_slots(seq, slots: list[int]) -> list[int]:
    drop = set(slots)
    return [v for i, v in enumerate(seq) if i not in drop]


def bob_partition(
    good: list[int],
    bad: list[int],
    c: int,
    t_handle: subset_codec.SubsetHandle,
    params: ProtocolParams,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Honest Bob's ordered announcement lists.

    R_c is a uniformly ordered random half of the good positions.  The
    other list receives fresh good positions at the T-indexed slots (so the
    values Bob must later announce are ones he actually received) and the
    remaining unused positions, uniformly ordered, at the other slots.
    """
    n = params.n
    half = n // 2
    if len(good) < half + params.beta_n:
        raise InfeasibleSplit(f"{len(good)} good positions cannot fill {half} + {params.beta_n}")
    good_perm = [int(v) for v in rng.permutation(good)]
    r_c = good_perm[:half]
    fill = good_perm[half : half + params.beta_n]
    used = set(r_c) | set(fill)
    leftovers = [int(v) for v in rng.permutation([p for p in range(n) if p not in used])]
    slots = subset_slots(t_handle)
    slot_set = set(slots)
    r_other: list[int] = [0] * half
    fill_iter = iter(fill)
    left_iter = iter(leftovers)
    for i in range(half):
        r_other[i] = next(fill_iter) if i in slot_set else next(left_iter)
    if c == 0:
        return tuple(r_c), tuple(r_other)
    return tuple(r_other), tuple(r_c)


def alice_validate_sets(r0: tuple[int, ...], r1: tuple[int, ...], n: int) -> None:
    """Reject announcements that are not an exact partition of the positions."""
    if len(r0) != n // 2 or len(r1) != n // 2:
        raise BadSize(f"lists must each hold {n // 2} positions")
    combined = r0 + r1
    if any(not (0 <= v < n) for v in combined):
        raise BadSize("position index out of range")
    if len(set(combined)) != n:
        raise RepeatedPosition("announced lists repeat a position")


def alice_check_partition(
    x: np.ndarray,
    r0: tuple[int, ...],
    r1: tuple[int, ...],
    t0: subset_codec.SubsetHandle,
    t1: subset_codec.SubsetHandle,
    a: int,
    y_r0_values,
    y_r1_values,
    w0_dmc,
    eps: float,
) -> bool:
    """Step-6 test: both announced blocks must be conditionally 2*eps-typical
    with Alice's input on the checked positions under the inner channel.

    The announced block for R0 is indexed by T_(1-a), the one for R1 by
    T_a.  Wrong block lengths or symbols outside the inner output alphabet
    fail the check (an announced erasure can never be consistent).
    """
    slots_r0 = subset_slots(t1 if a == 0 else t0)
    slots_r1 = subset_slots(t0 if a == 0 else t1)
    y_r0_values = list(y_r0_values)
    y_r1_values = list(y_r1_values)
    if len(y_r0_values) != len(slots_r0) or len(y_r1_values) != len(slots_r1):
        return False
    out_size = w0_dmc.output_alphabet_size
    if any(not (0 <= v < out_size) for v in y_r0_values + y_r1_values):
        return False
    x = np.asarray(x, dtype=np.int64)
    x_r0 = x[restrict(r0, slots_r0)]
    x_r1 = x[restrict(r1, slots_r1)]
    return typicality.is_cond_typical(y_r0_values, x_r0, w0_dmc, 2 * eps) and typicality.is_cond_typical(
        y_r1_values, x_r1, w0_dmc, 2 * eps
    )


def alice_strings(
    x: np.ndarray,
    r0: tuple[int, ...],
    r1: tuple[int, ...],
    t_for_r0: subset_codec.SubsetHandle,
    t_for_r1: subset_codec.SubsetHandle,
    params: ProtocolParams,
    alphabet_size: int,
    rng: np.random.Generator,
) -> tuple[StringsMsg, np.ndarray, np.ndarray]:
    """Step 7: hash the unchecked remainders and build the strings message.

    Q0 drops R0's checked slots, Q1 drops R1's; both keep announcement
    order, which is shared knowledge, so Bob hashes the same bit string.
    Returns the message plus Alice's outputs S0, S1.
    """
    q0 = without_slots(r0, subset_slots(t_for_r0))
    q1 = without_slots(r1, subset_slots(t_for_r1))
    assert len(q0) == params.mu_n and len(q1) == params.mu_n
    width = uhash.symbol_width(alphabet_size)
    in_bits = params.mu_n * width
    g0 = uhash.sample_hash(in_bits, params.g_len, rng)
    g1 = uhash.sample_hash(in_bits, params.g_len, rng)
    h0 = uhash.sample_hash(in_bits, params.k, rng)
    h1 = uhash.sample_hash(in_bits, params.k, rng)
    x = np.asarray(x, dtype=np.int64)
    bits_q0 = uhash.serialize_symbols(x[q0], alphabet_size)
    bits_q1 = uhash.serialize_symbols(x[q1], alphabet_size)
    s0 = uhash.apply(h0, bits_q0)
    s1 = uhash.apply(h1, bits_q1)
    msg = StringsMsg(
        g0_value=tuple(int(b) for b in uhash.apply(g0, bits_q0)),
        g1_value=tuple(int(b) for b in uhash.apply(g1, bits_q1)),
        g0=HashDescriptor.from_hash(g0),
        g1=HashDescriptor.from_hash(g1),
        h0=HashDescriptor.from_hash(h0),
        h1=HashDescriptor.from_hash(h1),
    )
    return msg, s0, s1


def bob_decode(
    y_qc: np.ndarray,
    g_c: uhash.HashFunction,
    g_value: np.ndarray,
    h_c: uhash.HashFunction,
    w0_dmc,
    input_dist: InputDistribution,
    eps: float,
    *,
    hard_limit: int = 1 << 24,
) -> np.ndarray:
    """Step 8: recover the chosen block and hash it.

    Candidates are all input strings conditionally eps-typical with the
    received block under the inner channel; the input-marginal type test is
    deliberately not applied, because at practical block lengths integer
    symbol counts cannot sit within a tiny eps*length window of the mean,
    which would empty the candidate set, and channel consistency alone is
    what identifies the transmitted block.  Candidates are filtered by the
    announced g-hash value; a unique survivor is h-hashed, anything else
    yields the all-zero string.  This step never aborts.
    """
    candidates, truncated = typicality.enumerate_cond_typical(
        y_qc,
        w0_dmc,
        input_dist,
        eps,
        cap=None,
        hard_limit=hard_limit,
        require_input_typical=False,
    )
    assert not truncated
    alphabet = w0_dmc.input_alphabet_size
    g_value = np.asarray(g_value, dtype=np.uint8)
    survivors = [
        cand
        for cand in candidates
        if np.array_equal(uhash.apply(g_c, uhash.serialize_symbols(cand, alphabet)), g_value)
    ]
    if len(survivors) == 1:
        return uhash.apply(h_c, uhash.serialize_symbols(survivors[0], alphabet))
    return np.zeros(h_c.out_bits, dtype=np.uint8)


class HonestBob:
    """Receiver state machine; subclass hooks are the adversary surface."""

    def __init__(self, gec: GecSpec, params: ProtocolParams, rng: np.random.Generator, choice: int | None = None):
        self.gec = gec
        self.params = params
        self.rng = rng
        self.choice = choice
        self.y: np.ndarray | None = None
        self.good: list[int] = []
        self.bad: list[int] = []
        self.w: np.ndarray | None = None
        self.t_handle: subset_codec.SubsetHandle | None = None
        self.r0: tuple[int, ...] = ()
        self.r1: tuple[int, ...] = ()
        self.codec = subset_codec.codec_params(params.n // 2, params.beta_n)
        self.strings_msg: StringsMsg | None = None

    def receive(self, y: np.ndarray) -> bool:
        """Step 3; returns True when Bob must abort."""
        self.y = np.asarray(y, dtype=np.int64)
        self.good, self.bad, abort = good_bad_split(self.y, self.gec.erasure_symbol, self.params)
        return abort

    def partition(self) -> SetsAnnounce:
        """Step 4: draw c and w, decode T, announce the ordered lists."""
        if self.choice is None:
            self.choice = int(self.rng.integers(0, 2))
        self.w = self.rng.integers(0, 2, size=self.params.m_bits, dtype=np.uint8)
        self.t_handle = subset_codec.decode_string(self.codec, self.w)
        self.r0, self.r1 = bob_partition(self.good, self.bad, self.choice, self.t_handle, self.params, self.rng)
        return SetsAnnounce(r0=self.r0, r1=self.r1)

    def ih_input(self) -> np.ndarray:
        return self.w

    def ih_responder(self):
        """Honest Bob answers from his input; None selects that fast path."""
        return None

    def announce(self, outcome: IhOutcome, t0: subset_codec.SubsetHandle, t1: subset_codec.SubsetHandle) -> CheckAnnounce:
        """Step 6: route the checks with a = d XOR c and reveal the values."""
        a = outcome.d ^ self.choice
        slots_r0 = subset_slots(t1 if a == 0 else t0)
        slots_r1 = subset_slots(t0 if a == 0 else t1)
        return CheckAnnounce(
            a=a,
            y_r0=tuple(int(self.y[p]) for p in restrict(self.r0, slots_r0)),
            y_r1=tuple(int(self.y[p]) for p in restrict(self.r1, slots_r1)),
        )

    def decode(
        self,
        msg: StringsMsg,
        a: int,
        t0: subset_codec.SubsetHandle,
        t1: subset_codec.SubsetHandle,
        input_dist: InputDistribution,
        *,
        mode: str = "search",
        truth: np.ndarray | None = None,
        hard_limit: int = 1 << 24,
    ) -> np.ndarray:
        """Step 8 on Bob's side; ``mode='genie'`` skips the search and only
        verifies that the true block (supplied by the caller) passes both
        filters, for large-n estimates where enumeration is out of reach."""
        self.strings_msg = msg
        if self.choice == 0:
            slots = subset_slots(t1 if a == 0 else t0)
            q_c = without_slots(self.r0, slots)
            g_c, h_c, g_val = msg.g0.to_hash(), msg.h0.to_hash(), msg.g0_value
        else:
            slots = subset_slots(t0 if a == 0 else t1)
            q_c = without_slots(self.r1, slots)
            g_c, h_c, g_val = msg.g1.to_hash(), msg.h1.to_hash(), msg.g1_value
        y_qc = self.y[q_c]
        eps_decode = 2 * self.params.eps_typ
        if mode == "genie":
            if truth is None:
                raise ValueError("genie mode needs the true block")
            alphabet = self.gec.inner.input_alphabet_size
            ok = typicality.is_cond_typical(y_qc, truth, self.gec.inner, eps_decode) and np.array_equal(
                uhash.apply(g_c, uhash.serialize_symbols(truth, alphabet)),
                np.asarray(g_val, dtype=np.uint8),
            )
            if ok:
                return uhash.apply(h_c, uhash.serialize_symbols(truth, alphabet))
            return np.zeros(h_c.out_bits, dtype=np.uint8)
        return bob_decode(
            y_qc,
            g_c,
            np.asarray(g_val, dtype=np.uint8),
            h_c,
            self.gec.inner,
            input_dist,
            eps_decode,
            hard_limit=hard_limit,
        )


class HonestAlice:
    """Sender state machine; subclass hooks are the adversary surface."""

    def __init__(self, gec: GecSpec, input_dist: InputDistribution, params: ProtocolParams, rng: np.random.Generator):
        self.gec = gec
        self.input_dist = input_dist
        self.params = params
        self.rng = rng
        self.x: np.ndarray | None = None
        self.s0: np.ndarray | None = None
        self.s1: np.ndarray | None = None

    def channel_input(self) -> np.ndarray:
        self.x = self.rng.choice(len(self.input_dist.probs), size=self.params.n, p=self.input_dist.probs)
        return self.x

    def validate_sets(self, msg: SetsAnnounce) -> None:
        alice_validate_sets(msg.r0, msg.r1, self.params.n)

    def check(self, msg: CheckAnnounce, r0, r1, t0, t1) -> bool:
        if msg.a not in (0, 1):
            return False
        return alice_check_partition(
            self.x, r0, r1, t0, t1, msg.a, msg.y_r0, msg.y_r1, self.gec.inner, self.params.eps_typ
        )

    def strings(self, r0, r1, a: int, t0, t1) -> StringsMsg:
        t_for_r0 = t1 if a == 0 else t0
        t_for_r1 = t0 if a == 0 else t1
        msg, self.s0, self.s1 = alice_strings(
            self.x, r0, r1, t_for_r0, t_for_r1, self.params, self.gec.inner.input_alphabet_size, self.rng
        )
        return msg

    def guess_choice(self, transcript: Transcript) -> int | None:
        """Curious-Alice hook: guess Bob's choice bit after the session."""
        return None


@dataclass(frozen=True)
class SessionResult:
    """Outcome of one session run.

    ``achieved_rate`` is k/n for the configured parameters; ``outcome``
    distinguishes completion from an abort at a recorded step.  Alice's
    outputs and Bob's value are bit tuples when present.
    """

    outcome: str
    aborted_step: int | None
    abort_reason: str | None
    s0: tuple[int, ...] | None
    s1: tuple[int, ...] | None
    choice: int | None
    bob_value: tuple[int, ...] | None
    achieved_rate: float
    transcript: Transcript

    @property
    def completed(self) -> bool:
        return self.outcome == "completed"

    @property
    def correct(self) -> bool:
        if not self.completed or self.choice is None:
            return False
        expected = self.s0 if self.choice == 0 else self.s1
        return self.bob_value == expected


def _abort_result(
    transcript: Transcript, sender: str, step: int, reason: str, params: ProtocolParams, choice: int | None
) -> SessionResult:
    transcript.add(sender, AbortMsg(step=step, reason=reason))
    return SessionResult(
        outcome="aborted",
        aborted_step=step,
        abort_reason=reason,
        s0=None,
        s1=None,
        choice=choice,
        bob_value=None,
        achieved_rate=params.rate,
        transcript=transcript,
    )


def run_session(
    gec: GecSpec,
    input_dist: InputDistribution,
    params: ProtocolParams,
    alice_rng: np.random.Generator,
    bob_rng: np.random.Generator,
    bob_choice: int | None = None,
    *,
    alice: HonestAlice | None = None,
    bob: HonestBob | None = None,
    decode_mode: str = "search",
    enum_hard_limit: int = 1 << 24,
) -> SessionResult:
    """Drive one full session between the two state machines.

    Channel noise is drawn from ``alice_rng`` (she is the one using the
    channel), so a (seed, seed) pair fully determines the transcript.
    Malicious parties are injected through ``alice``/``bob``; schema
    violations they produce surface as recorded aborts, never exceptions.
    """
    alice = alice or HonestAlice(gec, input_dist, params, alice_rng)
    bob = bob or HonestBob(gec, params, bob_rng, choice=bob_choice)
    transcript = Transcript()
    codec = subset_codec.codec_params(params.n // 2, params.beta_n)

    x = alice.channel_input()
    y = transmit(gec, x, alice_rng)
    if bob.receive(y):
        return _abort_result(transcript, "bob", 3, "too few non-erased positions", params, bob.choice)
    try:
        sets_msg = bob.partition()
    except InfeasibleSplit as exc:
        return _abort_result(transcript, "bob", 4, str(exc), params, bob.choice)
    transcript.add("bob", sets_msg)
    try:
        alice.validate_sets(sets_msg)
    except (RepeatedPosition, BadSize) as exc:
        return _abort_result(transcript, "alice", 4, str(exc), params, bob.choice)

    try:
        ih_transcript, outcome = ih_run(
            params.m_bits, bob.ih_input(), alice_rng, bob_responder=bob.ih_responder()
        )
    except MalformedResponse as exc:
        return _abort_result(transcript, "alice", 5, str(exc), params, bob.choice)
    for i, bit in enumerate(ih_transcript.responses):
        transcript.add("alice", IhQueryMsg(index=i, bits=tuple(int(v) for v in ih_transcript.query_bits(i))))
        transcript.add("bob", IhResponseMsg(index=i, bit=bit))
    t0 = subset_codec.decode_string(codec, outcome.w0)
    t1 = subset_codec.decode_string(codec, outcome.w1)

    check_msg = bob.announce(outcome, t0, t1)
    transcript.add("bob", check_msg)
    if not alice.check(check_msg, sets_msg.r0, sets_msg.r1, t0, t1):
        return _abort_result(transcript, "alice", 6, "announced values not consistent", params, bob.choice)

    strings_msg = alice.strings(sets_msg.r0, sets_msg.r1, check_msg.a, t0, t1)
    transcript.add("alice", strings_msg)

    truth = None
    if decode_mode == "genie":
        if bob.choice == 0:
            slots = subset_slots(t1 if check_msg.a == 0 else t0)
            truth = np.asarray(x, dtype=np.int64)[without_slots(sets_msg.r0, slots)]
        else:
            slots = subset_slots(t0 if check_msg.a == 0 else t1)
            truth = np.asarray(x, dtype=np.int64)[without_slots(sets_msg.r1, slots)]
    bob_value = bob.decode(
        strings_msg,
        check_msg.a,
        t0,
        t1,
        input_dist,
        mode=decode_mode,
        truth=truth,
        hard_limit=enum_hard_limit,
    )
    return SessionResult(
        outcome="completed",
        aborted_step=None,
        abort_reason=None,
        s0=tuple(int(b) for b in alice.s0),
        s1=tuple(int(b) for b in alice.s1),
        choice=bob.choice,
        bob_value=tuple(int(b) for b in bob_value),
        achieved_rate=params.rate,
        transcript=transcript,
    )
