"""Counter-based seed derivation shared by every sampler."""

import numpy as np


def _zigzag(value: int) -> int:
    """Map a signed integer to a non-negative one (0, -1, 1, -2, ... -> 0, 1, 2, 3, ...)."""
    return 2 * value if value >= 0 else -2 * value - 1


def seed_sequence(master: int, *keys: int) -> np.random.SeedSequence:
    """A SeedSequence keyed by the master seed and any number of integer keys."""
    return np.random.SeedSequence([_zigzag(master), *(_zigzag(k) for k in keys)])


def derive_seed(master: int, *keys: int) -> int:
    """
    Derive a 64-bit child seed.

    The result depends only on (master, keys), never on call order, so work
    items can be scheduled in any order and still reproduce bit-exactly.
    """
    state = seed_sequence(master, *keys).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def rng_for(master: int, *keys: int) -> np.random.Generator:
    """A Philox generator for the stream (master, keys)."""
    return np.random.Generator(np.random.Philox(seed_sequence(master, *keys)))
