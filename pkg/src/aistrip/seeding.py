"""Per-purpose random streams derived from one master seed.

Every consumer asks for ``derive_rng(master, purpose, *keys)``; the stream is
a pure function of those arguments, so any single component (a bootstrap,
a fold, one SMOTE class) can be replayed in isolation.
"""
from __future__ import annotations

import zlib

import numpy as np

PURPOSES = (
    "split",        # MMSI shuffle for the grouped train/test split
    "folds",        # per-class shuffle for stratified folds
    "smote",        # keys: class code
    "bootstrap",    # keys: tree index
    "features",     # keys: tree index; per-node feature subsets
    "permutation",  # keys: feature index, repeat
    "synthetic",    # synthetic fleet generator
)


def derive_rng(master: int, purpose: str, *keys: int) -> np.random.Generator:
    tag = zlib.crc32(purpose.encode())
    entropy = [int(master) & 0xFFFFFFFF, tag, *(int(k) & 0xFFFFFFFF for k in keys)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
