"""Deterministic stream derivation from one 64-bit master seed.

A master seed plus a path of small integers (group index, trial index, a
stage tag) is expanded through numpy's SeedSequence counter construction.
Streams derived from distinct paths are independent, and the derivation does
not depend on call order, which is what makes runs byte-reproducible.
"""

from __future__ import annotations

import numpy as np

# stage tags keep streams for different purposes disjoint even when the
# numeric path components collide
_TAGS = {
    "mechanism": 0x6D656368,
    "permute": 0x7065726D,
    "anatomy": 0x616E6174,
    "attack": 0x61747463,
    "trial": 0x7472696C,
    "noise": 0x6E6F6973,
    "data": 0x64617461,
}


def derive_rng(seed: int, *path: int | str) -> np.random.Generator:
    ints = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for part in path:
        ints.append(_TAGS[part] if isinstance(part, str) else int(part) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(ints))


def derive_seed(seed: int, *path: int | str) -> int:
    """A fresh 63-bit integer seed derived from the master seed and path."""
    return int(derive_rng(seed, *path).integers(0, 2**63 - 1))
