"""Deterministic per-purpose RNG stream splitting.

Every random draw in the package flows from an explicit 64-bit master seed
through a numpy SeedSequence spawn key. The key is a tuple of small
non-negative integers whose first entry names the purpose; the remaining
entries index the realization / cell / candidate. Two streams with different
keys are statistically independent, and the mapping (seed, key) -> stream is
stable across processes, which is what makes sweep results independent of
worker count.

Purpose tags:
    PURPOSE_CHANNEL     channel realizations
    PURPOSE_ESTIMATION  channel-estimation error draws
    PURPOSE_NOISE       payload bits and thermal noise during simulation
    PURPOSE_SCHEDULING  random schedule candidates
"""

from __future__ import annotations

import numpy as np

PURPOSE_CHANNEL = 0
PURPOSE_ESTIMATION = 1
PURPOSE_NOISE = 2
PURPOSE_SCHEDULING = 3


def seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for stream `path` under `master_seed`."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    if any(p < 0 for p in path):
        raise ValueError("stream path entries must be non-negative")
    return np.random.SeedSequence(master_seed, spawn_key=tuple(path))


def rng_stream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator drawing from the (master_seed, path) stream."""
    return np.random.default_rng(seed_sequence(master_seed, *path))


def derive_seed(master_seed: int, *path: int) -> int:
    """Collapse a stream id to a plain integer seed (for sub-APIs that take one)."""
    return int(seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0])
