"""Universal hashing over GF(2) with Toeplitz matrices.

One family serves both the error-verification hash and privacy
amplification.  A seed of n + ell - 1 uniform bits defines the ell x n
Toeplitz matrix T[i, j] = seed[ell - 1 + j - i]; hashing is the GF(2)
matrix-vector product.  Any two distinct inputs collide on exactly a
2^-ell fraction of seeds, which is what the correctness and leftover-
hashing arguments consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bitops import as_bits, bits_to_hex, hex_to_bits


@dataclass(frozen=True, eq=False)
class ToeplitzSeed:
    """Seed bits plus the (n, ell) geometry they encode."""

    bits: np.ndarray
    n: int
    ell: int

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))
        if not 1 <= self.ell <= self.n:
            raise ValueError(f"need 1 <= ell <= n, got ell={self.ell}, n={self.n}")
        if self.bits.size != self.n + self.ell - 1:
            raise ValueError(
                f"seed needs {self.n + self.ell - 1} bits, got {self.bits.size}")

    def to_hex(self) -> str:
        return bits_to_hex(self.bits)

    @classmethod
    def from_hex(cls, s: str, n: int, ell: int) -> "ToeplitzSeed":
        return cls(hex_to_bits(s, n + ell - 1), n, ell)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ToeplitzSeed) and self.n == other.n
                and self.ell == other.ell
                and bool(np.array_equal(self.bits, other.bits)))


def sample_seed(n: int, ell: int, rng: np.random.Generator) -> ToeplitzSeed:
    """Draw a uniform seed for the n-to-ell family."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    return ToeplitzSeed(rng.integers(0, 2, size=n + ell - 1, dtype=np.uint8), n, ell)


def hash_bits(seed: ToeplitzSeed, x) -> np.ndarray:
    """Apply the Toeplitz hash: y_i = XOR_j seed[ell-1+j-i] * x_j."""
    x = as_bits(x)
    if x.size != seed.n:
        raise ValueError(f"input has {x.size} bits, seed expects {seed.n}")
    # correlate(seed, x, 'valid')[t] = sum_j seed[t+j] x_j for t = 0..ell-1;
    # row i of the Toeplitz matrix is offset t = ell-1-i.
    corr = np.correlate(seed.bits.astype(np.int64), x.astype(np.int64), "valid")
    return (corr[::-1] & 1).astype(np.uint8)


def _all_seed_hashes(n: int, ell: int, x) -> np.ndarray:
    """Hash one input under every seed, as a (2^(n+ell-1), ell) table.

    Row s equals hash_bits(seed_s, x) where seed_s is the bit expansion
    of s, MSB first.  Used by the exhaustive collision oracle.
    """
    x = as_bits(x)
    width = n + ell - 1
    count = 1 << width
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    seeds = ((np.arange(count, dtype=np.uint64)[:, None] >> shifts) & 1).astype(np.uint8)
    # column i of B selects the seed positions feeding output bit i
    B = np.zeros((width, ell), dtype=np.uint8)
    for i in range(ell):
        for j in range(n):
            B[ell - 1 + j - i, i] ^= x[j]
    return (seeds.astype(np.int64) @ B.astype(np.int64) & 1).astype(np.uint8)


def collision_probability_exhaustive(n: int, ell: int, x, xp) -> Fraction:
    """Exact collision fraction over all 2^(n+ell-1) seeds.

    Test oracle for universality; limited to n <= 12, ell <= 6 to keep
    the enumeration small.
    """
    x, xp = as_bits(x), as_bits(xp)
    if x.size != n or xp.size != n:
        raise ValueError("inputs must have length n")
    if np.array_equal(x, xp):
        raise ValueError("inputs must be distinct")
    if n > 12 or ell > 6:
        raise ValueError("exhaustive oracle limited to n <= 12, ell <= 6")
    hx = _all_seed_hashes(n, ell, x)
    hxp = _all_seed_hashes(n, ell, xp)
    collisions = int(np.all(hx == hxp, axis=1).sum())
    return Fraction(collisions, 1 << (n + ell - 1))
