"""Toeplitz hashing: construction, linearity, universality oracle."""

from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from finitekey.bitops import int_to_bits
from finitekey.toeplitz import (ToeplitzSeed, _all_seed_hashes,
                                collision_probability_exhaustive, hash_bits,
                                sample_seed)


def test_seed_validation():
    with pytest.raises(ValueError):
        ToeplitzSeed(np.array([1, 0], dtype=np.uint8), n=1, ell=2)  # ell > n
    with pytest.raises(ValueError):
        ToeplitzSeed(np.array([1, 0], dtype=np.uint8), n=3, ell=2)  # wrong length


def test_seed_hex_roundtrip():
    rng = np.random.default_rng(3)
    for n, ell in [(1, 1), (4, 2), (12, 6), (9, 5)]:
        seed = sample_seed(n, ell, rng)
        back = ToeplitzSeed.from_hex(seed.to_hex(), n, ell)
        assert back == seed


def test_sample_seed_deterministic():
    a = sample_seed(4, 2, np.random.default_rng(99))
    b = sample_seed(4, 2, np.random.default_rng(99))
    assert a == b
    assert a.bits.size == 5


def test_sample_seed_uniform():
    # (n=3, ell=2): 16 possible 4-bit seeds, each 1/16 +- 5 sigma
    rng = np.random.default_rng(11)
    draws = 100_000
    counts = np.zeros(16, dtype=int)
    for _ in range(draws):
        s = sample_seed(3, 2, rng)
        counts[int("".join(map(str, s.bits)), 2)] += 1
    p = 1.0 / 16
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= 5 * sigma)


def test_hash_hand_example():
    # 1x2 Toeplitz row (1, 0) dotted with x = (1, 0)
    seed = ToeplitzSeed(np.array([1, 0], dtype=np.uint8), n=2, ell=1)
    assert hash_bits(seed, [1, 0]).tolist() == [1]
    assert hash_bits(seed, [0, 1]).tolist() == [0]


def test_hash_explicit_matrix():
    # ell=2, n=3: T = [[b1 b2 b3], [b0 b1 b2]]
    seed = ToeplitzSeed(np.array([1, 0, 1, 1], dtype=np.uint8), n=3, ell=2)
    T = np.array([[0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    for bits in product((0, 1), repeat=3):
        x = np.array(bits, dtype=np.uint8)
        assert np.array_equal(hash_bits(seed, x), T @ x & 1)


def test_hash_zero_and_linearity():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 16))
        ell = int(rng.integers(1, n + 1))
        seed = sample_seed(n, ell, rng)
        assert not hash_bits(seed, np.zeros(n, dtype=np.uint8)).any()
        x = rng.integers(0, 2, n, dtype=np.uint8)
        y = rng.integers(0, 2, n, dtype=np.uint8)
        assert np.array_equal(hash_bits(seed, x ^ y),
                              hash_bits(seed, x) ^ hash_bits(seed, y))


def test_hash_linearity_exhaustive_small():
    rng = np.random.default_rng(17)
    for n in range(1, 7):
        for ell in range(1, min(n, 3) + 1):
            seed = sample_seed(n, ell, rng)
            for xi, yi in combinations(range(2 ** n), 2):
                x, y = int_to_bits(xi, n), int_to_bits(yi, n)
                assert np.array_equal(hash_bits(seed, x ^ y),
                                      hash_bits(seed, x) ^ hash_bits(seed, y))


def test_hash_determinism():
    seed = sample_seed(8, 4, np.random.default_rng(0))
    x = np.random.default_rng(1).integers(0, 2, 8, dtype=np.uint8)
    assert np.array_equal(hash_bits(seed, x), hash_bits(seed, x))


def test_all_seed_hashes_matches_public_hash():
    rng = np.random.default_rng(23)
    for n, ell in [(2, 1), (3, 2), (4, 3), (6, 3)]:
        x = rng.integers(0, 2, n, dtype=np.uint8)
        table = _all_seed_hashes(n, ell, x)
        for s in rng.integers(0, 2 ** (n + ell - 1), size=12):
            seed = ToeplitzSeed(int_to_bits(int(s), n + ell - 1), n, ell)
            assert np.array_equal(table[int(s)], hash_bits(seed, x))


def test_collision_probability_examples():
    assert collision_probability_exhaustive(2, 1, [0, 1], [1, 0]) == Fraction(1, 2)
    # any distinct pair at (n=3, ell=2) collides on exactly 1/4 of seeds
    for xi, yi in combinations(range(8), 2):
        got = collision_probability_exhaustive(3, 2, int_to_bits(xi, 3),
                                               int_to_bits(yi, 3))
        assert got == Fraction(1, 4)


def test_collision_probability_rejects_equal_inputs():
    with pytest.raises(ValueError):
        collision_probability_exhaustive(3, 2, [1, 0, 1], [1, 0, 1])
