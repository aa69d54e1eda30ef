"""Named, order-independent random streams derived from one master seed.

Each (purpose, node) pair gets its own Philox counter-based generator, so a
stream's values never depend on how many draws other streams made.
"""
import numpy as np

PURPOSES = {"initial-state": 0, "process": 1, "measurement": 2, "test": 99}


def stream(seed, purpose, node=0):
    """Generator for ``purpose`` at 1-based ``node`` (0 for plant-level streams)."""
    try:
        tag = PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown stream purpose {purpose!r}") from None
    ss = np.random.SeedSequence(int(seed), spawn_key=(tag, int(node)))
    return np.random.Generator(np.random.Philox(ss))
