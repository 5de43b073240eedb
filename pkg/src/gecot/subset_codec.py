"""Rank/unrank of fixed-size subsets and all-strings-valid bit encoding.

Subsets of {1..N} of cardinality L are ordered colexicographically
(combinatorial number system): the rank of the ascending members
(s_1 < ... < s_L) is sum_i C(s_i - 1, i).  Bit strings of length
m = ceil(log2 C(N, L)) decode by reducing the string's big-endian integer
value modulo C(N, L), so every string is a valid encoding and each subset
has either one or two preimage strings.

Ranks are arbitrary-precision integers; nothing here overflows for N in
the thousands.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .bits import bits_to_int, int_to_bits


class InvalidSubset(ValueError):
    pass


class RankOutOfRange(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CodecParams:
    """Subset universe {1..n_items}, subset size, and encoding width."""

    n_items: int
    subset_size: int
    total: int
    m_bits: int


@dataclass(frozen=True)
class SubsetHandle:
    """An ascending member tuple together with its colexicographic rank."""

    members: tuple[int, ...]
    rank: int


def codec_params(n_items: int, subset_size: int) -> CodecParams:
    if not (0 <= subset_size <= n_items) or n_items < 1:
        raise InvalidSubset(f"no subsets of size {subset_size} in a {n_items}-element set")
    total = comb(n_items, subset_size)
    m_bits = max(total - 1, 0).bit_length()  # ceil(log2 total), 0 for total == 1
    return CodecParams(n_items=n_items, subset_size=subset_size, total=total, m_bits=m_bits)


def _check_members(params: CodecParams, members) -> tuple[int, ...]:
    members = tuple(int(v) for v in members)
    if len(members) != params.subset_size:
        raise InvalidSubset(f"expected {params.subset_size} members, got {len(members)}")
    if any(b <= a for a, b in zip(members, members[1:])):
        raise InvalidSubset("members must be strictly increasing")
    if members and (members[0] < 1 or members[-1] > params.n_items):
        raise InvalidSubset(f"members must lie in 1..{params.n_items}")
    return members


def rank(params: CodecParams, members) -> int:
    """Colexicographic rank of an ascending member tuple."""
    members = _check_members(params, members)
    return sum(comb(v - 1, i) for i, v in enumerate(members, start=1))


def unrank(params: CodecParams, r: int) -> SubsetHandle:
    """Inverse of :func:`rank`."""
    if not (0 <= r < params.total):
        raise RankOutOfRange(f"rank {r} outside [0, {params.total})")
    members = []
    rem = r
    v = params.n_items
    for i in range(params.subset_size, 0, -1):
        while comb(v - 1, i) > rem:
            v -= 1
        members.append(v)
        rem -= comb(v - 1, i)
        v -= 1
    members.reverse()
    return SubsetHandle(members=tuple(members), rank=r)


def decode_string(params: CodecParams, w: np.ndarray) -> SubsetHandle:
    """Subset encoded by an m-bit string: its integer value mod C(N, L)."""
    w = np.asarray(w, dtype=np.uint8)
    if len(w) != params.m_bits:
        raise LengthMismatch(f"expected {params.m_bits} bits, got {len(w)}")
    return unrank(params, bits_to_int(w) % params.total)


def preimages(params: CodecParams, handle: SubsetHandle) -> list[np.ndarray]:
    """All m-bit strings decoding to this subset (one or two of them)."""
    out = [int_to_bits(handle.rank, params.m_bits)]
    second = handle.rank + params.total
    if second < (1 << params.m_bits):
        out.append(int_to_bits(second, params.m_bits))
    return out
