"""Seeded randomness. Everything flows from one integer seed through Philox."""

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    # Philox is counter-based: (seed, stream) pairs give independent, replayable streams
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(stream)]))
