"""Seeded random streams used by the ensemble generators.

All randomness is drawn from PCG64 (a 128-bit-state permuted congruential
generator emitting 64-bit words) through :meth:`random_raw`, and converted
here with explicit arithmetic so that the same seed yields the same matrix on
every platform and NumPy version:

* uniforms in [0, 1): top 53 bits of a word times 2**-53;
* fair coins: the top bit of a word;
* standard Gaussians: Box-Muller on two uniforms, cosine branch only.
"""
from __future__ import annotations

import numpy as np


class Stream:
    """Deterministic stream of uniforms, coins and Gaussians."""

    def __init__(self, seed: int):
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(self.seed)

    def words(self, size: int) -> np.ndarray:
        return np.asarray(self._bitgen.random_raw(size), dtype=np.uint64)

    def uniform(self, size: int) -> np.ndarray:
        return (self.words(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def coins(self, size: int) -> np.ndarray:
        """Independent fair +-1 signs."""
        top = (self.words(size) >> np.uint64(63)).astype(np.int64)
        return (2 * top - 1).astype(np.float64)

    def normal(self, size: int) -> np.ndarray:
        u1 = 1.0 - self.uniform(size)  # (0, 1], keeps log finite
        u2 = self.uniform(size)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
