"""Counter-based randomness.

Every random draw in the package comes from a Philox generator keyed by
``(seed, purpose, index...)`` through :class:`numpy.random.SeedSequence`.
Draws are therefore pure functions of their key and never depend on the
order in which other draws were made.
"""

import numpy as np

# purpose tags; never renumber, streams are keyed by them
STRUCTURE = 0
ROWS = 1
ADVERSARY = 2
PERMUTATION = 3
FILLER = 4
TRIAL = 5
ARMS = 6
DETECTOR = 7
SAMPLER = 8

MASK64 = (1 << 64) - 1


def _entropy(seed):
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed


def generator(seed, *key):
    ss = np.random.SeedSequence(_entropy(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """A fresh 64-bit seed that depends only on ``(seed, key)``."""
    ss = np.random.SeedSequence(_entropy(seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)
