"""Deterministic random-stream derivation.

Every Monte Carlo trial draws from a generator derived from
(master_seed, command tag, trial index) via numpy's SeedSequence spawn
keys, so results are reproducible regardless of the order or
parallelism in which trials execute.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_int(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")


def stream(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for one (tag, index) cell."""
    ss = np.random.SeedSequence(entropy=master_seed,
                                spawn_key=(_tag_int(tag), index))
    return np.random.Generator(np.random.PCG64(ss))
