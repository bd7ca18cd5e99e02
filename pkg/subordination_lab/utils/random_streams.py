"""
Deterministic random streams.

Every replicate draws from its own generator derived from the master seed and
the replicate index, so results do not depend on scheduling or thread count.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Independent stream families used inside one replicate"""
    CLOCK = 0       # subordinator jumps and marginals
    DRIVER = 1      # Brownian drivers of X and of the Bessel process
    INTEGRATOR = 2  # Brownian motion B of stochastic integrals
    LABELS = 3      # classifier labels and auxiliary draws


def replicate_rng(seed: int, index: int, stream: Stream = Stream.CLOCK, *keys: int) -> np.random.Generator:
    """
    Build the generator for one replicate.

    Args:
        seed: Master seed of the experiment
        index: Replicate index
        stream: Stream family
        keys: Further integers (schedule position, cell index, ...)

    Returns:
        A fresh numpy Generator
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index), int(stream), *map(int, keys)))
    return np.random.default_rng(sequence)


def experiment_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for experiment-level draws that are not tied to one replicate."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(2 ** 31 - 1, *map(int, keys)))
    return np.random.default_rng(sequence)


def derive_seed(seed: int, *keys: int) -> int:
    """An independent master seed for a sub-experiment, as a plain integer."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(2 ** 31 - 2, *map(int, keys)))
    return int(sequence.generate_state(1, np.uint64)[0])
