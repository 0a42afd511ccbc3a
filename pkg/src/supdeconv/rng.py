"""Seeded, splittable random streams.

Every replicate gets its own generator derived from ``(base_seed, stream,
replicate)`` through numpy's SeedSequence spawn keys, so results do not
depend on execution order or on how replicates are spread over workers.
Normal variates come from numpy's ziggurat sampler on PCG64.
"""

from __future__ import annotations

from typing import Union

import numpy as np

STREAMS = {"data": 0, "oracle": 1, "diag": 2, "process": 3, "exact": 4}

Seed = Union[int, np.random.SeedSequence, np.random.Generator, tuple]


def replicate_seed(base_seed: int, stream: Union[str, int], replicate: int) -> np.random.SeedSequence:
    """Seed for replicate ``replicate`` of ``stream``: SeedSequence(base, spawn_key=(stream, replicate))."""
    sid = STREAMS[stream] if isinstance(stream, str) else int(stream)
    return np.random.SeedSequence(entropy=int(base_seed), spawn_key=(sid, int(replicate)))


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        seed = replicate_seed(*seed)
    return np.random.Generator(np.random.PCG64(seed))
