"""Dual Next-Fit: pour every item into the open bin until it reaches level 1."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from . import kernels
from .core import DiscreteDistribution, DnfCoverError, ItemList, ValidationError, rational
from .rng import RandomSeed, Stream

CLOSED = "closed"


class InvalidItem(ValidationError):
    pass


class NeverCloses(ValidationError):
    pass


@dataclass(frozen=True)
class CloseEvent:
    index: int  # position of the closing item
    overshoot: Fraction


@dataclass(frozen=True)
class DnfRun:
    """Result of DNF(start, L).  ``final_level == 0`` means the closed state."""

    start_level: Fraction
    bins_closed: int
    final_level: Fraction
    close_events: tuple[CloseEvent, ...]

    @property
    def closed(self) -> bool:
        return self.final_level == 0

    @property
    def total_overshoot(self) -> Fraction:
        return sum((e.overshoot for e in self.close_events), Fraction(0))


def _start_level(start) -> Fraction:
    if start is None or start == CLOSED:
        return Fraction(0)
    level = rational(start)
    if not 0 <= level < 1:
        raise ValidationError(f"start level {level} outside [0, 1)")
    return level


def dnf_run(start, items: ItemList | Sequence) -> DnfRun:
    """Pack ``items`` from bin level ``start`` (a rational or ``CLOSED``), recording every close."""
    level = start_level = _start_level(start)
    events = []
    for idx, x in enumerate(items):
        x = rational(x)
        if not 0 <= x <= 1:
            raise InvalidItem(f"item {idx} has size {x} outside [0, 1]")
        level += x
        if level >= 1:
            events.append(CloseEvent(idx, level - 1))
            level = Fraction(0)
    return DnfRun(start_level, len(events), level, tuple(events))


def dnf(items: ItemList | Sequence, start=CLOSED) -> int:
    """Number of bins DNF closes; fast integer path without telemetry."""
    items = items if isinstance(items, ItemList) else ItemList(tuple(items))
    level = _start_level(start)
    scale = lcm(items.scale(), level.denominator)
    if scale >= 1 << 62:
        return dnf_run(level, items).bins_closed
    arr = kernels.as_int64(items.int_items(scale))
    bins, _ = kernels.backend().dnf_count(arr, scale, int(level * scale))
    return int(bins)


def waste(bins: int, items: ItemList | Sequence) -> Fraction:
    """W^A(L) = s(L) - A(L)."""
    items = items if isinstance(items, ItemList) else ItemList(tuple(items))
    total = items.total
    if bins < 0 or bins > total:
        raise ValidationError(f"{bins} bins cannot be covered by total size {total}")
    return total - bins


def _closing(dist: DiscreteDistribution):
    if dist.max_size == 0:
        raise NeverCloses("a point mass at 0 never closes a bin")


def stopping_time_sample(dist: DiscreteDistribution, seed: RandomSeed) -> tuple[int, Fraction]:
    """Draw items until the bin closes; return (T, R) with R = S_T - 1."""
    _closing(dist)
    cum, denom = dist.prob_weights()
    stream = Stream(seed)
    level, count = Fraction(0), 0
    while level < 1:
        level += dist.sizes[bisect_right(cum, stream.below(denom))]
        count += 1
    return count, level - 1


def stopping_time_samples(
    dist: DiscreteDistribution, trials: int, seed: RandomSeed, threads: int | None = None
) -> tuple[np.ndarray, np.ndarray, int]:
    """Vectorized stopping times: trial t uses stream ``seed.stream + t``.

    Returns ``(T, R_scaled, scale)``; the overshoot of trial t is ``R_scaled[t] / scale``.
    """
    _closing(dist)
    scale = dist.scale()
    if scale >= 1 << 62:
        raise DnfCoverError("size denominators too large for integer kernels")
    sizes = kernels.as_int64(dist.int_sizes())
    cum, denom = dist.prob_weights()
    cum = kernels.as_uint64(cum)
    impl = kernels.backend()

    def chunk(stream0, count):
        return impl.stopping_times(sizes, cum, denom, scale, seed.seed, stream0, count)

    t, r = kernels.run_trials(chunk, trials, seed.stream, threads)
    return t, r, scale
