"""Deterministic 64-bit pseudo-random generator shared by the whole pipeline.

Simulations, dataset construction, weight initialization and latent sampling
all need playthroughs and artifacts that reproduce bit for bit across
platforms and Python versions, so we pin one explicit generator instead of
relying on library RNGs whose stream layout may change between releases.

The core is SplitMix64 (Steele et al.): a 64-bit counter advanced by the
golden-ratio increment, scrambled by two xor-multiply rounds. It is tiny,
well studied, and passes BigCrush when used as a stream like this.

Derived draws:
- floats use the top 53 bits, giving uniforms on [0, 1)
- bounded integers use Lemire's multiply-shift; for power-of-two bounds this
  is exactly uniform, otherwise the bias is below n / 2**64
- normals come from Box-Muller on two uniforms, with the paired variate cached
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Seeded deterministic random stream."""

    __slots__ = ("state", "_spare_normal")

    def __init__(self, seed: int):
        self.state = seed & _MASK64
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_in(self, low: float, high: float) -> float:
        return low + (high - low) * self.uniform()

    def randrange(self, n: int) -> int:
        """Integer in [0, n) via multiply-shift."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        return (self.next_u64() * n) >> 64

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def normal(self) -> float:
        """Standard normal variate (Box-Muller, paired draw cached)."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = self.uniform()
        if u1 <= 0.0:
            u1 = 2.0**-53
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def normals(self, n: int) -> list[float]:
        return [self.normal() for _ in range(n)]

    def fork(self) -> "SplitMix64":
        """Independent child stream keyed off the next raw draw."""
        return SplitMix64(self.next_u64())
