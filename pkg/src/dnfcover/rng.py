"""Reproducible random streams.

Every stream is a SplitMix64 sequence whose starting state is derived from
``(seed, stream)``::

    key     = mix64(mix64(seed) ^ (stream * GOLDEN mod 2**64))
    state_j = key + (j + 1) * GOLDEN   (mod 2**64)
    draw_j  = mix64(state_j)

A bounded integer below ``bound`` is ``(draw * bound) >> 64``.  The compiled
kernels and the pure-Python kernels use exactly these formulas, so a stream
is identical whichever backend is active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_SEED = 0x5EEDB1C0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return mix64(mix64(seed) ^ ((stream * GOLDEN) & MASK64))


@dataclass(frozen=True)
class RandomSeed:
    """A ``(seed, stream)`` pair naming one reproducible stream."""

    seed: int = DEFAULT_SEED
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= value <= MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def with_stream(self, stream: int) -> "RandomSeed":
        return RandomSeed(self.seed, stream & MASK64)

    def draws(self) -> Iterator[int]:
        state = stream_key(self.seed, self.stream)
        while True:
            state = (state + GOLDEN) & MASK64
            yield mix64(state)


class Stream:
    """Stateful cursor over a :class:`RandomSeed` stream."""

    def __init__(self, seed: RandomSeed):
        self._state = stream_key(seed.seed, seed.stream)

    def next64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def below(self, bound: int) -> int:
        return (self.next64() * bound) >> 64
