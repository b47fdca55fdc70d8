"""SplitMix64: a small, portable 64-bit generator, so generated inputs are
identical on every platform for a given seed."""

from __future__ import annotations

MASK = (1 << 64) - 1


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform in ``[0, n)`` (multiply-shift; bias below 2**-32 for the
        sizes used here)."""
        return (self.next_u64() * n) >> 64

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def sample(self, n: int, k: int) -> list[int]:
        """``k`` distinct values from ``[0, n)``, sorted."""
        if k > n:
            raise ValueError("sample larger than population")
        if 2 * k > n:
            pool = list(range(n))
            for i in range(k):
                j = i + self.below(n - i)
                pool[i], pool[j] = pool[j], pool[i]
            return sorted(pool[:k])
        seen: set[int] = set()
        while len(seen) < k:
            seen.add(self.below(n))
        return sorted(seen)
