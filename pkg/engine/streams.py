"""
Random Streams
Deterministic substreams derived from a master seed

A substream is addressed by a key path, e.g. (year, replicate_index), so the
numbers a work item sees do not depend on which worker runs it or when.
"""

import numpy as np


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """
    Independent generator for one work item

    Args:
        master_seed: Non-negative run seed (up to 64 bits)
        *key: Non-negative integers identifying the work item

    Returns:
        numpy Generator seeded from SeedSequence(master_seed, spawn_key=key)
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def derive_seed(master_seed: int, *key: int) -> int:
    """
    64-bit seed for a nested computation that takes its own master seed

    Args:
        master_seed: Run seed
        *key: Work item identifier

    Returns:
        int: Seed in [0, 2**64)
    """
    state = np.random.SeedSequence(master_seed, spawn_key=tuple(key)).generate_state(1, np.uint64)
    return int(state[0])
