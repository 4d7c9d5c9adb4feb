"""Deterministic 64-bit random number generation.

Every stochastic component in this package (parameter init, match seeds,
biased strategies, batch shuffling) draws from :class:`SplitMix64` so that
identical seeds give bit-identical runs on any platform.

The state transition, written out so the stream is reproducible from the
docs alone:

    state  <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z      <- state
    z      <- ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z      <- ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output <- z xor (z >> 31)

Doubles in [0, 1) take the top 53 bits of the output; normal deviates use
Box-Muller on two such doubles (one spare cached per pair).
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """64-bit generator with the splitmix state transition above."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Gaussian deviate via Box-Muller; pairs share one radius draw."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return mean + std * z
        u1 = self.uniform()
        if u1 <= 0.0:
            u1 = 2.0 ** -53
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare_normal = r * math.sin(2.0 * math.pi * u2)
        return mean + std * r * math.cos(2.0 * math.pi * u2)

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Plain modulo; the <2^-50 bias is irrelevant here."""
        if n <= 0:
            raise ValueError(f"randrange needs n >= 1, got {n}")
        return self.next_u64() % n

    def choice(self, seq):
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(root: int, *parts: int) -> int:
    """Fold integer parts into a root seed, one splitmix scramble per part.

    Used to give every (pair, round) match its own independent stream while
    keeping the whole tournament a pure function of one seed.
    """
    h = root & _MASK64
    for p in parts:
        h = SplitMix64((h ^ ((p + _GAMMA) & _MASK64)) & _MASK64).next_u64()
    return h
