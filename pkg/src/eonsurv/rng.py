"""Portable seeded pseudo-random generator.

The generator is SplitMix64 (Steele, Lea and Flood, 2014): a 64-bit state
advanced by the golden-ratio increment ``0x9E3779B97F4A7C15`` and finalized
with the mixing function

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic modulo 2**64.  Bounded integers use rejection sampling: a raw
draw ``r`` is rejected while ``r < 2**64 mod bound`` and otherwise mapped to
``r mod bound``.  Any implementation following these three rules reproduces
the same streams from the same seed.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
NAME = "splitmix64"


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % bound
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % bound

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in the closed range ``[low, high]``."""
        return low + self.below(high - low + 1)

    def sample_indices(self, population: int, count: int) -> list[int]:
        """Draw ``count`` distinct indices via a partial Fisher-Yates shuffle.

        Step ``i`` swaps position ``i`` with ``i + below(population - i)``, so
        the first ``k`` draws do not depend on ``count``.
        """
        if not 0 <= count <= population:
            raise ValueError(f"cannot draw {count} items from {population}")
        pool = list(range(population))
        for i in range(count):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]
