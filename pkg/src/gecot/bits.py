"""Bit-vector helpers shared by the hashing, encoding and protocol layers.

A bit string is a numpy array of dtype uint8 holding 0/1 values.  The
convention everywhere is big-endian: index 0 is the most significant bit
when the vector is read as an integer, and hex renderings left-pad with
zero bits up to a whole number of bytes.
"""

from __future__ import annotations

import numpy as np


def bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for b in np.asarray(bits, dtype=np.uint8):
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    if value < 0 or (width >= 0 and value >> width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_hex(bits: np.ndarray) -> str:
    """Lowercase hex of a bit string, zero bits padded on the left."""
    bits = np.asarray(bits, dtype=np.uint8)
    nbytes = max(1, (len(bits) + 7) // 8) if len(bits) else 0
    if nbytes == 0:
        return ""
    return format(bits_to_int(bits), "0{}x".format(2 * nbytes))


def hex_to_bits(s: str, nbits: int) -> np.ndarray:
    if nbits == 0:
        return np.zeros(0, dtype=np.uint8)
    return int_to_bits(int(s, 16), nbits)


def random_bits(nbits: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=nbits, dtype=np.uint8)


def random_bitint(nbits: int, rng) -> int:
    """Uniform integer in [0, 2**nbits), drawn byte-wise.

    Works for any width and only requires the generator to expose
    ``bytes``, which keeps deterministic stubs easy in tests.
    """
    if nbits == 0:
        return 0
    nbytes = (nbits + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), "big") & ((1 << nbits) - 1)
