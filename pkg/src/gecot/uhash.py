"""2-universal hashing over bit strings via binary Toeplitz matrices.

A family member is the Toeplitz matrix T with T[i, j] = seed[i - j + n - 1]
for an n-bit input and an l-bit output, so a uniformly random seed of
n + l - 1 bits picks a uniformly random member.  Application is a
matrix-vector product over GF(2), realized as a binary convolution.  For
any two distinct inputs the collision probability over the family is
exactly 2**-l, and the family is linear: apply(h, a ^ b) equals
apply(h, a) ^ apply(h, b).

Non-binary symbol strings are hashed after an injective fixed-width
big-endian serialization; min-entropy accounting is unaffected by an
injective map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bits import random_bits


class OutLongerThanIn(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class SymbolOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class HashFunction:
    """One family member: lengths plus the Toeplitz seed bits."""

    in_bits: int
    out_bits: int
    seed: np.ndarray

    def __post_init__(self):
        expected = self.in_bits + self.out_bits - 1 if self.out_bits > 0 else 0
        if len(self.seed) != max(expected, 0):
            raise LengthMismatch(
                f"seed must have {max(expected, 0)} bits, got {len(self.seed)}"
            )


@dataclass(frozen=True)
class ExtractorBound:
    """Leftover-hash distance bound for extracting out_bits from min_entropy.

    ``sd_bound`` is (1/2) * sqrt(2**(out_bits - min_entropy)).  When an
    ``eps`` was supplied, ``extractor_ok`` records whether
    out_bits <= min_entropy - 2*log2(1/eps) + 2 holds, which guarantees
    sd_bound <= eps.
    """

    min_entropy: float
    out_bits: int
    sd_bound: float
    extractor_ok: bool | None = None


def sample_hash(in_bits: int, out_bits: int, rng: np.random.Generator) -> HashFunction:
    """Uniformly random family member."""
    if in_bits < 1:
        raise ValueError("in_bits must be at least 1")
    if out_bits < 0:
        raise ValueError("out_bits must be non-negative")
    if out_bits > in_bits:
        raise OutLongerThanIn(f"cannot expand {in_bits} bits to {out_bits}")
    seed_len = in_bits + out_bits - 1 if out_bits > 0 else 0
    return HashFunction(in_bits=in_bits, out_bits=out_bits, seed=random_bits(seed_len, rng))


def apply(h: HashFunction, x: np.ndarray) -> np.ndarray:
    """Toeplitz matrix-vector product over GF(2)."""
    x = np.asarray(x, dtype=np.uint8)
    if len(x) != h.in_bits:
        raise LengthMismatch(f"expected {h.in_bits} input bits, got {len(x)}")
    if h.out_bits == 0:
        return np.zeros(0, dtype=np.uint8)
    conv = np.convolve(h.seed.astype(np.int64), x.astype(np.int64))
    return (conv[h.in_bits - 1 : h.in_bits - 1 + h.out_bits] % 2).astype(np.uint8)


def lhl_bound(min_entropy: float, out_bits: int, eps: float | None = None) -> ExtractorBound:
    """Closed-form leftover-hash bound, optionally with the extractor check."""
    if min_entropy < 0:
        raise ValueError("min-entropy must be non-negative")
    sd = 0.5 * math.sqrt(2.0 ** (out_bits - min_entropy))
    ok = None
    if eps is not None:
        ok = out_bits <= min_entropy - 2 * math.log2(1.0 / eps) + 2
    return ExtractorBound(min_entropy=min_entropy, out_bits=out_bits, sd_bound=sd, extractor_ok=ok)


def symbol_width(alphabet_size: int) -> int:
    return max(1, (alphabet_size - 1).bit_length())


def serialize_symbols(x, alphabet_size: int) -> np.ndarray:
    """Fixed-width big-endian bit encoding of a symbol string (injective)."""
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= alphabet_size):
        raise SymbolOutOfRange(f"symbols must lie in [0, {alphabet_size})")
    width = symbol_width(alphabet_size)
    out = np.zeros(len(x) * width, dtype=np.uint8)
    for i, sym in enumerate(x):
        for j in range(width):
            out[i * width + j] = (int(sym) >> (width - 1 - j)) & 1
    return out


def deserialize_symbols(bits: np.ndarray, alphabet_size: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    width = symbol_width(alphabet_size)
    if len(bits) % width:
        raise LengthMismatch(f"bit length {len(bits)} not a multiple of width {width}")
    n = len(bits) // width
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        v = 0
        for j in range(width):
            v = (v << 1) | int(bits[i * width + j])
        if v >= alphabet_size:
            raise SymbolOutOfRange(f"decoded symbol {v} outside [0, {alphabet_size})")
        out[i] = v
    return out
