"""SplitMix64, a counter-based generator that is trivial to port bit-for-bit.

The n-th output (n >= 1) is ``mix(seed + n * 0x9E3779B97F4A7C15 mod 2**64)`` with::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

(all arithmetic mod 2**64). Derived draws:

* ``below(n)``: rejection sampling; a raw draw ``x`` is rejected while
  ``x >= 2**64 - (2**64 % n)``, then ``x % n`` is returned.
* ``random()``: ``(x >> 11) * 2**-53``, a float in ``[0, 1)``.
"""
from __future__ import annotations

GAMMA = 0x9E3779B97F4A7C15
MASK = (1 << 64) - 1
_TWO64 = 1 << 64


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _TWO64 - (_TWO64 % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
