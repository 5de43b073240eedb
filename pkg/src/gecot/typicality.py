"""Typical and conditionally typical sequences with quantitative bounds.

A length-n string is eps-typical for a distribution P when every symbol
count is within eps*n of n*P(symbol) and no symbol outside P's support
occurs.  A pair (x, y) is conditionally eps-typical for a channel W when
every joint count N(a,b) is within eps*n of W(b|a) * N(a|x) and no pair
with W(b|a) = 0 occurs.  Both tests use inclusive inequalities at the
boundary.  The candidate enumeration used by the OT decoder lives here as
well, along with the closed-form constants of the standard typical-set
cardinality and probability bounds.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .channel import Dmc, InputDistribution

# Absolute slack added to the inclusive thresholds so that exact-boundary
# cases are not lost to floating-point rounding of eps*n.
_FLOAT_GUARD = 1e-12


class LengthMismatch(ValueError):
    pass


class SearchSpaceTooLarge(RuntimeError):
    """The requested enumeration exceeds the configured hard limit."""


@dataclass(frozen=True)
class TypeProfile:
    """Symbol occurrence counts of a string (its empirical type)."""

    counts: tuple[int, ...]
    length: int

    def prob(self, symbol: int) -> float:
        return self.counts[symbol] / self.length


@dataclass(frozen=True)
class TypicalityBounds:
    """Closed-form constants of the typical-set bounds.

    ``d_const`` applies to plain typicality of a distribution, ``e_const``
    to conditional typicality of a channel; whichever does not apply is
    None.  ``prob_lower`` is the probability lower bound for membership,
    clamped at 0 when vacuous.
    """

    d_const: float | None
    e_const: float | None
    prob_lower: float


def type_profile(x, alphabet_size: int) -> TypeProfile:
    x = np.asarray(x, dtype=np.int64)
    counts = np.bincount(x, minlength=alphabet_size)
    return TypeProfile(counts=tuple(int(c) for c in counts), length=len(x))


def is_typical(x, p: InputDistribution, eps: float) -> bool:
    """True iff every symbol count of ``x`` is within eps*n of its mean.

    Symbols with zero probability must not occur at all, regardless of eps.
    """
    x = np.asarray(x, dtype=np.int64)
    n = len(x)
    probs = np.asarray(p.probs, dtype=float)
    counts = np.bincount(x, minlength=len(probs))
    if len(counts) > len(probs):
        return False
    if np.any((probs == 0) & (counts > 0)):
        return False
    return bool(np.all(np.abs(counts - n * probs) <= eps * n + _FLOAT_GUARD))


def is_cond_typical(y, x, w: Dmc, eps: float) -> bool:
    """True iff (x, y) passes the conditional typicality test for ``w``.

    The reference joint count for the pair (a, b) is W(b|a) * N(a|x), i.e.
    the test is relative to the empirical type of ``x`` itself.  Pairs with
    W(b|a) = 0 must not occur at all.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) != len(y):
        raise LengthMismatch(f"input length {len(x)} != output length {len(y)}")
    n = len(x)
    trans = np.asarray(w.transition, dtype=float)
    pair_counts = Counter(zip(x.tolist(), y.tolist()))
    x_counts = np.bincount(x, minlength=w.input_alphabet_size)
    for (a, b), cnt in pair_counts.items():
        if a >= w.input_alphabet_size or b >= w.output_alphabet_size:
            return False
        if trans[a, b] == 0.0:
            return False
    for a in range(w.input_alphabet_size):
        if x_counts[a] == 0:
            # no occurrences: every pair count is 0 and |0 - 0| passes
            continue
        for b in range(w.output_alphabet_size):
            ref = trans[a, b] * x_counts[a]
            if abs(pair_counts.get((a, b), 0) - ref) > eps * n + _FLOAT_GUARD:
                return False
    return True


def typicality_bounds(source, n: int, eps: float) -> TypicalityBounds:
    """Constants and probability lower bound of the typical-set bounds.

    For an :class:`InputDistribution` the constant is
    D = sum over supported symbols of -log2 P(symbol) and the lower bound is
    1 - 2|X| exp(-n eps^2 / 2).  For a :class:`Dmc` the constant is
    E = max over inputs of the row sum of -log2 W(y|x) and the lower bound
    uses 2|X||Y| in place of 2|X|.  Lower bounds are clamped at 0.
    """
    if isinstance(source, InputDistribution):
        probs = np.asarray(source.probs, dtype=float)
        supported = probs[probs > 0]
        d_const = float(-np.log2(supported).sum())
        factor = 2 * len(probs)
        return TypicalityBounds(
            d_const=d_const,
            e_const=None,
            prob_lower=max(0.0, 1.0 - factor * math.exp(-n * eps * eps / 2.0)),
        )
    if isinstance(source, Dmc):
        trans = np.asarray(source.transition, dtype=float)
        row_sums = [float(-np.log2(row[row > 0]).sum()) for row in trans]
        e_const = max(row_sums)
        factor = 2 * source.input_alphabet_size * source.output_alphabet_size
        return TypicalityBounds(
            d_const=None,
            e_const=e_const,
            prob_lower=max(0.0, 1.0 - factor * math.exp(-n * eps * eps / 2.0)),
        )
    raise TypeError(f"expected InputDistribution or Dmc, got {type(source)!r}")


def restriction_failure_bound(w: Dmc, restricted_length: int, eps: float) -> float:
    """Chernoff-style bound on a random restriction losing 2*eps typicality.

    For a conditionally eps-typical pair restricted to a uniformly random
    subset of size ``restricted_length``, each joint count concentrates
    within eps * restricted_length of its scaled value; a union bound over
    the alphabet gives ``2 |X||Y| exp(-2 restricted_length eps^2)``, clamped
    at 1.
    """
    factor = 2 * w.input_alphabet_size * w.output_alphabet_size
    return min(1.0, factor * math.exp(-2.0 * restricted_length * eps * eps))


def enumerate_cond_typical(
    y,
    w: Dmc,
    p: InputDistribution,
    eps: float,
    cap: int | None = None,
    *,
    hard_limit: int = 1 << 24,
    require_input_typical: bool = True,
) -> tuple[list[np.ndarray], bool]:
    """All candidate inputs consistent with an observed output string.

    Returns, in lexicographic order, every string ``x`` of the same length
    as ``y`` such that ``is_cond_typical(y, x, w, eps)`` holds and — unless
    ``require_input_typical`` is disabled — ``is_typical(x, p, eps)`` holds
    as well.  The list is truncated at ``cap`` entries; the second return
    value reports whether truncation happened.

    Raises :class:`SearchSpaceTooLarge` when the alphabet-size**length
    search space exceeds ``hard_limit``; the caller is expected to size its
    parameters so this does not trigger.
    """
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    a = w.input_alphabet_size
    if a**n > hard_limit:
        raise SearchSpaceTooLarge(f"{a}**{n} exceeds the hard limit {hard_limit}")
    found: list[np.ndarray] = []
    truncated = False
    for cand in itertools.product(range(a), repeat=n):
        x = np.array(cand, dtype=np.int64)
        if require_input_typical and not is_typical(x, p, eps):
            continue
        if not is_cond_typical(y, x, w, eps):
            continue
        if cap is not None and len(found) == cap:
            truncated = True
            break
        found.append(x)
    return found, truncated
