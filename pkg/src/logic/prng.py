"""
PRNG Module

SplitMix64, the single source of randomness of a simulation world.
"""

from typing import Tuple

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
TWO_POW_64 = float(1 << 64)


def prng_next(state: int) -> Tuple[int, int]:
    """
    Advance a SplitMix64 state by one step.

    Args:
        state: Current 64-bit state

    Returns:
        (64-bit output, new state)
    """
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31), state


class SplitMix64:
    """Stateful SplitMix64 generator."""

    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next(self) -> int:
        value, self.state = prng_next(self.state)
        return value

    def next_unit(self) -> float:
        """Next value mapped to [0, 1) as value / 2**64."""
        return self.next() / TWO_POW_64

    def chance(self, probability: float) -> bool:
        """Draw once and report whether the draw falls below probability."""
        return self.next_unit() < probability
