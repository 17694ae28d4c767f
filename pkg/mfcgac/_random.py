"""Seed-derived random streams.

Every random draw in a run comes from a generator keyed by
``(seed, purpose, step, index)``, so the draws a step consumes do not depend on
how many draws earlier steps made, nor on how work is split across workers.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """What a random stream is used for."""

    NETWORK_INIT = 0
    INITIAL_STATE = 1
    PARTICLES = 2
    LANGEVIN = 3
    POLICY = 4
    ENVIRONMENT = 5
    PROBE = 6
    PERMUTATION = 7


def derive_rng(seed: int, stream: Stream, step: int = 0, index: int = 0) -> np.random.Generator:
    """Return the generator for one (purpose, step, index) slot of a seeded run.

    Args:
        seed: Run seed
        stream: Purpose of the draws
        step: Training step (0 outside the loop)
        index: Sub-stream, e.g. global/local network or minibatch number

    Returns:
        numpy Generator instance
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(int(stream), step, index))
    )
