"""Portable pseudo-random numbers for reproducible test functions.

A 64-bit linear congruential generator (Knuth's MMIX constants)::

    x <- (6364136223846793005 * x + 1442695040888963407) mod 2**64
    u  = (x >> 11) * 2**-53          # uniform in [0, 1)
    v  = 2 * u - 1                   # uniform in [-1, 1)

The state starts at ``seed mod 2**64`` and is advanced once before the
first draw.  Every step is integer arithmetic, so the stream is the same
in any language with 64-bit unsigned integers.
"""

from __future__ import annotations

import numpy as np

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK = (1 << 64) - 1


class LCG:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK

    def next_uint64(self) -> int:
        self.state = (MULTIPLIER * self.state + INCREMENT) & MASK
        return self.state

    def uniform(self, n: int) -> np.ndarray:
        """``n`` draws in ``[0, 1)`` with 53 random bits each."""
        out = np.empty(n)
        for i in range(n):
            out[i] = (self.next_uint64() >> 11) * 2.0**-53
        return out

    def symmetric(self, n: int) -> np.ndarray:
        """``n`` draws in ``[-1, 1)``."""
        return 2.0 * self.uniform(n) - 1.0
