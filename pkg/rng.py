"""
rng.py - Named, reproducible random streams

Every sample in the toolkit is drawn from a numpy Generator built on the
counter-based Philox bit generator. A stream is identified by
(master seed, stream name, index); the same triple always yields the same
numbers, regardless of how many worker threads are used.

    seed
     ├── simulate[b]   Monte-Carlo BLER chunk b (messages, then erasures)
     ├── process[p]    tree-process path p (branch choices)
     └── slln[0]       batched D-hat sequences
"""

import numpy as np

STREAM_IDS = {
    'simulate': 1,
    'process': 2,
    'slln': 3,
}


def make_stream(seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Deterministically create the Generator for one named stream."""
    if name not in STREAM_IDS:
        raise KeyError(f"Unknown random stream: {name}")
    root = np.random.SeedSequence([int(seed), STREAM_IDS[name], int(index)])
    return np.random.Generator(np.random.Philox(root))
