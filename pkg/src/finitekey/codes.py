"""Syndrome-based error correction at desk scale.

Protocol simulations run real linear codes with brute-force
minimum-weight coset decoding (block length capped at 32); the key-rate
calculator never touches a decoder and only uses the leakage model
r = ceil(factor * n * h(delta)).  Decoding failures are intentional:
the verification hash, not the decoder, certifies correctness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bitops import as_bits, bits_to_hex
from .numerics import binary_entropy

MAX_BLOCK = 32


def _gf2_rank(rows: list[int]) -> int:
    rank = 0
    basis = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            rank += 1
    return rank


@dataclass
class LinearCode:
    """Parity-check description of a binary linear code.

    decode_radius is the largest weight w for which every error pattern
    of weight <= w has a unique syndrome, discovered by enumeration at
    generation time.  _leaders memoizes syndrome -> coset leader.
    """

    n: int
    r: int
    parity: np.ndarray
    decode_radius: int
    _col_ints: list[int] = field(default_factory=list, repr=False)
    _leaders: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.parity = np.asarray(self.parity, dtype=np.uint8)
        if self.parity.shape != (self.r, self.n):
            raise ValueError("parity shape does not match (r, n)")
        if not self._col_ints:
            self._col_ints = [
                int("".join(str(b) for b in self.parity[:, j]), 2)
                for j in range(self.n)
            ]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "decode_radius": self.decode_radius,
            "parity_rows": [bits_to_hex(row) for row in self.parity],
        }


def _syndrome_int(code: LinearCode, support) -> int:
    s = 0
    for j in support:
        s ^= code._col_ints[j]
    return s


def _discover_radius(code: LinearCode) -> int:
    """Largest w with injective syndromes on patterns of weight <= w.

    Also seeds the coset-leader memo with the unique leaders found.
    Terminates because the number of patterns eventually exceeds 2^r.
    """
    seen = {0: ()}
    leaders = {0: ()}
    w = 0
    while w < code.n:
        w += 1
        fresh = {}
        collided = False
        for support in itertools.combinations(range(code.n), w):
            s = _syndrome_int(code, support)
            if s in seen or s in fresh:
                collided = True
                break
            fresh[s] = support
        if collided:
            w -= 1
            break
        seen.update(fresh)
        leaders.update(fresh)
    code._leaders.update(leaders)
    return w


def generate_code(n: int, r: int, rng: np.random.Generator) -> LinearCode:
    """Random full-row-rank parity matrix with measured decode radius."""
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    if n > MAX_BLOCK:
        raise ValueError(f"block length {n} exceeds desk-scale cap {MAX_BLOCK}")
    while True:
        parity = rng.integers(0, 2, size=(r, n), dtype=np.uint8)
        row_ints = [int("".join(str(b) for b in row), 2) for row in parity]
        if _gf2_rank(row_ints) == r:
            break
    code = LinearCode(n=n, r=r, parity=parity, decode_radius=0)
    code.decode_radius = _discover_radius(code)
    return code


def make_code(parity) -> LinearCode:
    """Wrap an explicit parity matrix (must have full row rank)."""
    parity = np.asarray(parity, dtype=np.uint8)
    r, n = parity.shape
    row_ints = [int("".join(str(b) for b in row), 2) for row in parity]
    if _gf2_rank(row_ints) != r:
        raise ValueError("parity matrix is not full row rank")
    code = LinearCode(n=n, r=r, parity=parity, decode_radius=0)
    code.decode_radius = _discover_radius(code)
    return code


def synd(code: LinearCode, x) -> np.ndarray:
    x = as_bits(x)
    if x.size != code.n:
        raise ValueError(f"expected {code.n} bits, got {x.size}")
    return (code.parity @ x & 1).astype(np.uint8)


def _leader_for(code: LinearCode, s: int) -> tuple:
    """Minimum-weight error pattern with the given syndrome.

    Searches weight classes in increasing order; within the first class
    containing a match, the lexicographically smallest bit pattern wins
    (i.e. support pushed toward the high indices).
    """
    if s in code._leaders:
        return code._leaders[s]
    for w in range(code.decode_radius + 1, code.n + 1):
        matches = [sup for sup in itertools.combinations(range(code.n), w)
                   if _syndrome_int(code, sup) == s]
        if matches:
            def pattern_key(sup):
                bits = [0] * code.n
                for j in sup:
                    bits[j] = 1
                return tuple(bits)
            best = min(matches, key=pattern_key)
            code._leaders[s] = best
            return best
    raise AssertionError("full-rank parity must cover every syndrome")


def corr(code: LinearCode, y, z) -> np.ndarray:
    """Decode y against syndrome z: flip the coset leader of synd(y) ^ z."""
    y = as_bits(y)
    z = as_bits(z)
    if y.size != code.n or z.size != code.r:
        raise ValueError("length mismatch")
    target = int("".join(str(b) for b in (synd(code, y) ^ z)), 2)
    leader = _leader_for(code, target)
    out = y.copy()
    for j in leader:
        out[j] ^= 1
    return out


def leakage_bits(n: int, delta: float, factor: float) -> int:
    """Syndrome length of the leakage model r = ceil(factor * n * h(delta))."""
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta {delta} outside (0, 1/2)")
    if factor < 1.0:
        raise ValueError("leakage factor below the Shannon limit")
    r = math.ceil(factor * n * binary_entropy(delta))
    return max(1, min(n - 1, r))
