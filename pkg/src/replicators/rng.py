"""Reproducible random streams.

Every experiment takes one integer seed.  Trial ``i`` draws from its own
Philox-4x64-10 stream keyed by the seed with the counter's second word set to
``i``, so results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "philox4x64-10"


def substream(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    counter = np.array([0, index, domain, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1), counter=counter))


def random_words(gen: np.random.Generator, nbits: int) -> np.ndarray:
    """``nbits`` uniform bits packed little-endian into uint64 words."""
    nwords = (nbits + 63) // 64
    words = gen.integers(0, np.iinfo(np.uint64).max, size=nwords, dtype=np.uint64, endpoint=True)
    extra = nwords * 64 - nbits
    if extra:
        words[-1] &= np.uint64((1 << (64 - extra)) - 1)
    return words


def random_int(gen: np.random.Generator, nbits: int) -> int:
    """``nbits`` uniform bits as a Python int (bit i = cell i)."""
    if nbits <= 0:
        return 0
    return int.from_bytes(random_words(gen, nbits).tobytes(), "little")
