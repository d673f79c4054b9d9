"""Bit-string helpers shared by hashing, coding and the protocol runs.

Bit strings are numpy uint8 arrays; index 0 is the leftmost transmitted
bit and the most significant bit of the hex serialization.
"""

from __future__ import annotations

import numpy as np


def as_bits(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit strings must be one-dimensional")
    if np.any(arr > 1):
        raise ValueError("bit strings may only contain 0 and 1")
    return arr


def random_bits(length: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=length, dtype=np.uint8)


def hamming_distance(a, b) -> int:
    a, b = as_bits(a), as_bits(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


def bits_to_hex(bits) -> str:
    """Pack to lowercase hex, MSB first, zero-padded on the right."""
    bits = as_bits(bits)
    if bits.size == 0:
        return ""
    pad = (-bits.size) % 4
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    nibbles = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1], dtype=np.uint8)
    return "".join(f"{v:x}" for v in nibbles)


def hex_to_bits(s: str, length: int) -> np.ndarray:
    """Inverse of bits_to_hex given the original bit length."""
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    if len(s) * 4 < length:
        raise ValueError(f"hex string {s!r} too short for {length} bits")
    nibbles = np.array([int(c, 16) for c in s], dtype=np.uint8)
    bits = ((nibbles[:, None] >> np.array([3, 2, 1, 0])) & 1).reshape(-1)
    if np.any(bits[length:]):
        raise ValueError("nonzero padding bits")
    return bits[:length].astype(np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in as_bits(bits):
        out = (out << 1) | int(b)
    return out


def int_to_bits(value: int, length: int) -> np.ndarray:
    if value < 0 or value >= (1 << length):
        raise ValueError(f"{value} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)],
                    dtype=np.uint8)
