"""Deterministic derivation of independent random substreams.

Every trial, atom, and cycle gets its own generator derived from the master
seed and an integer index path, so results are identical no matter how the
work is ordered or parallelized.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

GENERATOR_NAME = "numpy.random.PCG64 seeded via SeedSequence(master_seed, spawn_key=path)"


def derive_substream(master_seed: int, indices: Sequence[int]) -> np.random.Generator:
    """Independent generator for one (seed, index-path) pair."""
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("master_seed must be an unsigned 64-bit integer")
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(i) for i in indices)
    )
    return np.random.Generator(np.random.PCG64(seq))
