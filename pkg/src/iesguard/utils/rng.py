"""Seeded random number generation.

All randomness in the package flows through ``numpy.random.Generator``
instances derived from one integer seed, so a (config, seed) pair fixes every
draw: network initialization, policy noise, flexible-load sampling, replay
sampling and profile generation.
"""
from typing import List, Optional, Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, None]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def spawn_generators(seed: Optional[int], n: int) -> List[np.random.Generator]:
    """Return ``n`` independent generators derived from ``seed``.

    Streams are stable: the k-th generator for a given seed never changes
    when more streams are requested.
    """
    return [make_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]


def spawn_seeds(seed: Optional[int], n: int) -> List[int]:
    """Return ``n`` derived integer seeds, for handing to worker processes."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(n)]
