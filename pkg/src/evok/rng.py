"""Portable deterministic RNG for the link simulator.

xorshift64* seeded through one round of splitmix64, so any integer seed
(including 0) yields a valid nonzero state.  Both algorithms are published
and a handful of lines in any language, which lets test oracles replay the
exact draw sequence independently; docs/link_sim.md pins the constants.

Draws:
    next_u64()  ->  the raw 64-bit output
    uniform()   ->  next_u64() >> 11, scaled by 2**-53, i.e. a float in [0, 1)
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step: returns the 64-bit output for state x."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Xorshift64Star:
    """xorshift64* stream; state initialised to splitmix64(seed)."""

    def __init__(self, seed: int):
        self.state = splitmix64(seed & _MASK)
        if self.state == 0:  # xorshift state must never be zero
            self.state = 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        s = self.state
        s ^= s >> 12
        s ^= (s << 25) & _MASK
        s ^= s >> 27
        self.state = s
        return (s * 0x2545F4914F6CDD1D) & _MASK

    def uniform(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits of the next draw."""
        return (self.next_u64() >> 11) * 2.0**-53
