"""Exact data model: rationals, discrete distributions, item lists, configurations.

All arithmetic uses :class:`fractions.Fraction`; sizes and probabilities are
never rounded.  Distributions keep their sizes sorted ascending so that every
serialized form is canonical.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from . import kernels
from .rng import RandomSeed

Rational = Fraction


class DnfCoverError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DnfCoverError, ValueError):
    """Input violates a documented precondition."""


class CapExceeded(DnfCoverError):
    """A configured enumeration or state cap was exceeded."""


class EmptyList(ValidationError):
    pass


class NotRealizable(ValidationError):
    pass


class NotPerfectConfiguration(ValidationError):
    pass


def rational(value) -> Fraction:
    """Parse ``value`` ("p/q" string, int, or Fraction) as an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"refusing inexact value {value!r}; pass a 'p/q' string or Fraction")


def fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution on rational item sizes in [0, 1].

    Sizes are sorted ascending on construction.  A size of 0 is rejected unless
    ``allow_zero`` is set: zero items never affect coverage but make
    configuration enumeration unbounded.
    """

    sizes: tuple[Fraction, ...]
    probs: tuple[Fraction, ...]
    allow_zero: bool = field(default=False, compare=False)

    def __post_init__(self):
        sizes = tuple(rational(s) for s in self.sizes)
        probs = tuple(rational(p) for p in self.probs)
        if not sizes:
            raise ValidationError("distribution needs at least one size")
        if len(sizes) != len(probs):
            raise ValidationError("sizes and probs differ in length")
        if len(set(sizes)) != len(sizes):
            raise ValidationError(f"duplicate sizes in {[fmt(s) for s in sizes]}")
        for s in sizes:
            if not 0 <= s <= 1:
                raise ValidationError(f"size {fmt(s)} outside [0, 1]")
            if s == 0 and not self.allow_zero:
                raise ValidationError("size 0 requires allow_zero=True")
        for p in probs:
            if not 0 < p <= 1:
                raise ValidationError(f"probability {fmt(p)} outside (0, 1]")
        if sum(probs) != 1:
            raise ValidationError(f"probabilities sum to {fmt(sum(probs))}, not 1")
        order = sorted(range(len(sizes)), key=sizes.__getitem__)
        object.__setattr__(self, "sizes", tuple(sizes[i] for i in order))
        object.__setattr__(self, "probs", tuple(probs[i] for i in order))

    @classmethod
    def uniform(cls, sizes: Iterable, allow_zero: bool = False) -> "DiscreteDistribution":
        sizes = [rational(s) for s in sizes]
        return cls(tuple(sizes), tuple(Fraction(1, len(sizes)) for _ in sizes), allow_zero)

    @classmethod
    def point(cls, size) -> "DiscreteDistribution":
        return cls((rational(size),), (Fraction(1),))

    def __len__(self):
        return len(self.sizes)

    @property
    def max_size(self) -> Fraction:
        return self.sizes[-1]

    def mean(self) -> Fraction:
        return sum((s * p for s, p in zip(self.sizes, self.probs)), Fraction(0))

    def second_moment(self) -> Fraction:
        return sum((s * s * p for s, p in zip(self.sizes, self.probs)), Fraction(0))

    def scale(self) -> int:
        """Least common denominator of the sizes: one bin is ``scale()`` units."""
        return lcm(*(s.denominator for s in self.sizes))

    def int_sizes(self) -> list[int]:
        q = self.scale()
        return [int(s * q) for s in self.sizes]

    def prob_weights(self) -> tuple[list[int], int]:
        """Cumulative integer weights and their common denominator."""
        denom = lcm(*(p.denominator for p in self.probs))
        if denom >= kernels.MAX_DENOM:
            raise ValidationError("probability denominators too large for sampling")
        cum, acc = [], 0
        for p in self.probs:
            acc += int(p * denom)
            cum.append(acc)
        return cum, denom

    def to_dict(self) -> dict:
        return {"sizes": [fmt(s) for s in self.sizes], "probs": [fmt(p) for p in self.probs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, allow_zero: bool = False) -> "DiscreteDistribution":
        try:
            sizes, probs = data["sizes"], data["probs"]
        except (KeyError, TypeError) as exc:
            raise ValidationError("distribution needs 'sizes' and 'probs'") from exc
        if not isinstance(sizes, list) or not isinstance(probs, list):
            raise ValidationError("'sizes' and 'probs' must be lists")
        for v in (*sizes, *probs):
            if not isinstance(v, (str, int)) or isinstance(v, bool):
                raise ValidationError(f"rationals must be 'p/q' strings, got {v!r}")
        return cls(tuple(rational(s) for s in sizes), tuple(rational(p) for p in probs), allow_zero)

    @classmethod
    def from_json(cls, text: str, allow_zero: bool = False) -> "DiscreteDistribution":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(data, allow_zero)

    def __str__(self):
        body = ", ".join(f"{fmt(s)}:{fmt(p)}" for s, p in zip(self.sizes, self.probs))
        return "{" + body + "}"


@dataclass(frozen=True)
class ItemList:
    """A finite sequence of item sizes in [0, 1]; zero-size items are allowed."""

    items: tuple[Fraction, ...]

    def __post_init__(self):
        items = tuple(rational(x) for x in self.items)
        for x in items:
            if not 0 <= x <= 1:
                raise ValidationError(f"item {fmt(x)} outside [0, 1]")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, *items) -> "ItemList":
        return cls(tuple(items))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __add__(self, other: "ItemList") -> "ItemList":
        return ItemList(self.items + other.items)

    def repeat(self, j: int) -> "ItemList":
        return ItemList(self.items * j)

    @property
    def total(self) -> Fraction:
        """s(L)."""
        return sum(self.items, Fraction(0))

    def scale(self) -> int:
        return lcm(1, *(x.denominator for x in self.items))

    def int_items(self, scale: int | None = None) -> list[int]:
        q = scale or self.scale()
        return [int(x * q) for x in self.items]

    def counts(self) -> Counter:
        return Counter(self.items)

    def to_json(self) -> str:
        return json.dumps({"items": [fmt(x) for x in self.items]})


@dataclass(frozen=True)
class PackingConfiguration:
    """Multiplicity vector aligned with a size vector."""

    counts: tuple[int, ...]
    kind: str  # "perfect" | "covering"

    @classmethod
    def classify(cls, sizes: Sequence[Fraction], counts: Sequence[int]) -> "PackingConfiguration":
        counts = tuple(int(c) for c in counts)
        if len(counts) != len(sizes) or any(c < 0 for c in counts):
            raise ValidationError("counts must be nonnegative and aligned with sizes")
        total = sum((c * s for c, s in zip(counts, sizes)), Fraction(0))
        if total == 1:
            return cls(counts, "perfect")
        if total > 1:
            smallest = min(s for c, s in zip(counts, sizes) if c)
            if total - smallest < 1:
                return cls(counts, "covering")
        raise ValidationError(f"{counts} is neither perfect nor a minimal cover (sum {fmt(total)})")

    def load(self, sizes: Sequence[Fraction]) -> Fraction:
        return sum((c * s for c, s in zip(self.counts, sizes)), Fraction(0))

    def __len__(self):
        return len(self.counts)


def induced_distribution(items: ItemList | Sequence, allow_zero: bool | None = None) -> DiscreteDistribution:
    """Distribution putting mass (occurrences of s)/N on every size s of the list.

    ``allow_zero`` defaults to whether the list contains a zero item.
    """
    items = items if isinstance(items, ItemList) else ItemList(tuple(items))
    if len(items) == 0:
        raise EmptyList("cannot induce a distribution from an empty list")
    counts = items.counts()
    n = len(items)
    if allow_zero is None:
        allow_zero = Fraction(0) in counts
    sizes = sorted(counts)
    return DiscreteDistribution(
        tuple(sizes), tuple(Fraction(counts[s], n) for s in sizes), allow_zero=allow_zero
    )


def realizing_list(dist: DiscreteDistribution, n: int) -> ItemList:
    """The ascending list of length ``n`` that induces ``dist`` exactly."""
    items = []
    for s, p in zip(dist.sizes, dist.probs):
        c = p * n
        if c.denominator != 1:
            need = lcm(*(q.denominator for q in dist.probs))
            raise NotRealizable(f"N={n} gives {fmt(c)} copies of {fmt(s)}; use a multiple of {need}")
        items.extend([s] * int(c))
    return ItemList(tuple(items))


def minimal_realizing_length(dist: DiscreteDistribution) -> int:
    return lcm(*(p.denominator for p in dist.probs))


def sample_indices(dist: DiscreteDistribution, n: int, seed: RandomSeed) -> list[int]:
    cum, denom = dist.prob_weights()
    rows = kernels.backend().iid_indices(kernels.as_uint64(cum), denom, n, seed.seed, seed.stream, 1)
    return rows[0].tolist()


def sample_iid(dist: DiscreteDistribution, n: int, seed: RandomSeed) -> ItemList:
    """``n`` i.i.d. draws from ``dist`` taken from the stream named by ``seed``."""
    if n < 0:
        raise ValidationError("n must be nonnegative")
    if n == 0:
        return ItemList(())
    sizes = dist.sizes
    return ItemList(tuple(sizes[i] for i in sample_indices(dist, n, seed)))


# -- distribution families ---------------------------------------------------


def family_fmk(m: int, k: int) -> DiscreteDistribution:
    """Uniform distribution on (1/k)^j and 1 - (1/k)^j for j = 1..m."""
    if m < 1 or k < 2:
        raise ValidationError("family fmk needs m >= 1 and k >= 2")
    sizes = []
    for j in range(1, m + 1):
        small = Fraction(1, k**j)
        sizes += [small, 1 - small]
    if len(set(sizes)) != len(sizes):
        raise ValidationError(f"fmk(m={m}, k={k}) has colliding sizes (1/k = 1 - 1/k at k=2)")
    return DiscreteDistribution.uniform(sizes)


def family_pp1(sizes: Sequence, config: PackingConfiguration | Sequence[int]) -> DiscreteDistribution:
    """Distribution with probabilities b/|b|_1 for a perfect configuration b."""
    sizes = [rational(s) for s in sizes]
    counts = tuple(config.counts if isinstance(config, PackingConfiguration) else config)
    if len(counts) != len(sizes) or any(c < 0 for c in counts) or not any(counts):
        raise NotPerfectConfiguration("configuration must be nonnegative, nonzero and aligned with sizes")
    load = sum((c * s for c, s in zip(counts, sizes)), Fraction(0))
    if load != 1:
        raise NotPerfectConfiguration(f"configuration {counts} sums to {fmt(load)}, not 1")
    total = sum(counts)
    support = [(s, Fraction(c, total)) for s, c in zip(sizes, counts) if c]
    return DiscreteDistribution(tuple(s for s, _ in support), tuple(p for _, p in support))


def family_pptwo(pairs: Sequence[tuple]) -> DiscreteDistribution:
    """Uniform distribution on the 2m sizes of complementary pairs (g_i, s_i)."""
    sizes = []
    for g, s in pairs:
        g, s = rational(g), rational(s)
        if g + s != 1:
            raise ValidationError(f"pair ({fmt(g)}, {fmt(s)}) does not sum to 1")
        if g < s:
            raise ValidationError(f"pair ({fmt(g)}, {fmt(s)}) must list the larger size first")
        sizes += [g, s]
    if len(set(sizes)) != len(sizes):
        raise ValidationError("pptwo sizes must be distinct")
    return DiscreteDistribution.uniform(sizes)


def family_uniform_discrete(k: int) -> DiscreteDistribution:
    """Uniform distribution on {1/k, 2/k, ..., 1}."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return DiscreteDistribution.uniform(Fraction(i, k) for i in range(1, k + 1))
