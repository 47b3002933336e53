"""Seedable, portable pseudo-random number generation.

Workload generation uses SplitMix64 (Steele, Lea & Flood's 64-bit
mixer).  The algorithm is a handful of integer operations, so any
implementation in any language reproduces the same stream from the same
seed; output files record the generator name for provenance.
"""

from __future__ import annotations

GENERATOR_NAME = "splitmix64"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 stream. State advances by the 64-bit golden ratio."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] via modulo reduction.

        The tiny modulo bias is irrelevant at simulation scales and the
        reduction is trivially portable, which is what matters here.
        """
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)
