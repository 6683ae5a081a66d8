"""
Seeded random streams

Every random draw is addressed by (shot seed, draw index) so a shot can be
replayed from its transcript position alone.
"""

import numpy as np


def shot_seed(master: int, shot: int) -> int:
    """64-bit seed of one shot derived from the master seed"""
    sequence = np.random.SeedSequence(master, spawn_key=(shot,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def draw_uniform(seed: int, index: int) -> float:
    return float(stream(seed, index).random())
