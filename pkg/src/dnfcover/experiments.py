"""Monte Carlo and exhaustive-enumeration experiments around DNF.

Every Monte Carlo routine takes a :class:`RandomSeed`; trial ``t`` draws from
stream ``seed.stream + t`` so estimates do not depend on the thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Optional

import numpy as np

from . import kernels
from .core import (
    DiscreteDistribution,
    DnfCoverError,
    ItemList,
    ValidationError,
    induced_distribution,
)
from .markov import build_chain, expected_items_per_bin
from .offline import DEFAULT_OPT_CAP, OptCache, TooLarge, gamma_rate, opt_value
from .rng import DEFAULT_SEED, RandomSeed

TV_MAX_ITEMS = 10
TV_MAX_PREFIX = 4


class NotApplicable(ValidationError):
    pass


@dataclass(frozen=True)
class TrialReport:
    estimate: float
    stderr: float
    trials: int
    seed: RandomSeed
    exact_reference: Optional[Fraction] = None

    @classmethod
    def from_samples(cls, values, seed, reference=None, scale=1.0) -> "TrialReport":
        values = np.asarray(values, dtype=np.float64)
        n = len(values)
        if n == 0:
            raise ValidationError("trials must be positive")
        sd = float(values.std(ddof=1)) if n > 1 else 0.0
        return cls(float(values.mean()) * scale, sd / math.sqrt(n) * scale, n, seed, reference)

    def within(self, value, sigmas: float = 4.0) -> bool:
        return abs(self.estimate - float(value)) <= sigmas * self.stderr + 1e-12

    def to_dict(self) -> dict:
        ref = self.exact_reference
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed.seed,
            "stream": self.seed.stream,
            "reference": None if ref is None else str(ref),
        }


def _seed(seed) -> RandomSeed:
    if seed is None:
        return RandomSeed(DEFAULT_SEED)
    return seed if isinstance(seed, RandomSeed) else RandomSeed(int(seed))


def _as_list(items) -> ItemList:
    return items if isinstance(items, ItemList) else ItemList(tuple(items))


def sample_matrix(dist: DiscreteDistribution, n: int, trials: int, seed: RandomSeed, threads=None) -> np.ndarray:
    """(trials, n) matrix of size indices; row t is I_n drawn from stream seed.stream + t."""
    cum, denom = dist.prob_weights()
    cum = kernels.as_uint64(cum)
    impl = kernels.backend()
    if n == 0:
        return np.zeros((trials, 0), dtype=np.int64)
    return kernels.run_trials(lambda s0, c: impl.iid_indices(cum, denom, n, seed.seed, s0, c), trials, seed.stream, threads)


def shuffled_dnf_counts(items, trials: int, seed: RandomSeed, threads=None) -> np.ndarray:
    """DNF(sigma(L)) for ``trials`` uniform permutations sigma (Fisher-Yates)."""
    items = _as_list(items)
    scale = items.scale()
    arr = kernels.as_int64(items.int_items(scale))
    impl = kernels.backend()
    return kernels.run_trials(lambda s0, c: impl.shuffled_dnf(arr, scale, seed.seed, s0, c), trials, seed.stream, threads)


# -- random order ---------------------------------------------------------------------


def random_order_ratio_estimate(items, trials: int, seed=None, opt: int | None = None, threads=None) -> TrialReport:
    """Estimate E_sigma[DNF(sigma(L))] / OPT(L)."""
    items = _as_list(items)
    seed = _seed(seed)
    if opt is None:
        try:
            opt = opt_value(items)
        except TooLarge as exc:
            raise DnfCoverError(f"OPT(L) unavailable: {exc}; pass opt= explicitly") from None
    if opt <= 0:
        raise DnfCoverError("OPT(L) = 0: ratio undefined")
    counts = shuffled_dnf_counts(items, trials, seed, threads)
    return TrialReport.from_samples(counts, seed, scale=1.0 / opt)


@lru_cache(maxsize=4096)
def _ro_exact(weights: tuple, counts: tuple, level: int, q: int) -> Fraction:
    total = sum(counts)
    if total == 0:
        return Fraction(0)
    acc = Fraction(0)
    for i, c in enumerate(counts):
        if c:
            rest = counts[:i] + (c - 1,) + counts[i + 1 :]
            new = level + weights[i]
            if new >= q:
                acc += c * (1 + _ro_exact(weights, rest, 0, q))
            else:
                acc += c * _ro_exact(weights, rest, new, q)
    return acc / total


def random_order_exact(items) -> Fraction:
    """Exact E_sigma[DNF(sigma(L))] by dynamic programming over (remaining multiset, level)."""
    items = _as_list(items)
    sizes = sorted(set(items))
    q = items.scale()
    c = items.counts()
    return _ro_exact(tuple(int(s * q) for s in sizes), tuple(c[s] for s in sizes), 0, q)


def concat_convergence(items, j_max: int, trials: int, seed=None, threads=None) -> list[TrialReport]:
    """Random-order ratio estimates for L^j, j = 1..j_max."""
    items = _as_list(items)
    seed = _seed(seed)
    base = opt_value(items)
    perfect = base == items.total
    out = []
    for j in range(1, j_max + 1):
        lj = items.repeat(j)
        opt = j * base if perfect else opt_value(lj)
        out.append(random_order_ratio_estimate(lj, trials, seed, opt=opt, threads=threads))
    return out


def dnf_deviation_diagnostic(items, trials: int, seed=None, threads=None) -> float:
    """|mean_sigma DNF(sigma(L)) - N pi_F(c)| / N^(2/3), with pi_F(c) = 1/E[T] exactly."""
    items = _as_list(items)
    seed = _seed(seed)
    dist = induced_distribution(items, allow_zero=False) if Fraction(0) not in items.counts() else None
    if dist is None:
        raise ValidationError("lists with zero items have no closed-state chain")
    pi_c = 1 / expected_items_per_bin(build_chain(dist))
    n = len(items)
    mean = float(shuffled_dnf_counts(items, trials, seed, threads).mean())
    return abs(mean - n * float(pi_c)) / n ** (2 / 3)


def opt_deviation_diagnostic(items) -> float:
    """|OPT(L) - N gamma(F_L)| / N^(2/3).

    Exactly 0 for lists packed with zero waste under a perfect-packing F.  For
    other F the covering-LP value stands in for gamma.
    """
    items = _as_list(items)
    nonzero = [x for x in items if x > 0]
    n = len(items)
    opt = opt_value(items)
    if not nonzero:
        return 0.0
    dist = induced_distribution(nonzero)
    gamma = Fraction(gamma_rate(dist).value) * len(nonzero) / n  # zeros add items, not size
    return float(abs(opt - n * gamma)) / n ** (2 / 3)


# -- sampling with and without replacement --------------------------------------------


def tv_prefix_check(items, b: int) -> tuple[Fraction, Fraction]:
    """Exact TV between the length-b prefix of a uniform permutation and b i.i.d. draws.

    Returns ``(tv, b^2 / (2N))``.
    """
    items = _as_list(items)
    n = len(items)
    if n > TV_MAX_ITEMS or b > TV_MAX_PREFIX:
        raise TooLarge(f"exhaustive TV limited to N <= {TV_MAX_ITEMS}, b <= {TV_MAX_PREFIX}")
    if not 1 <= b <= n:
        raise ValidationError("need 1 <= b <= N")
    counts = items.counts()
    sizes = sorted(counts)
    falling = math.perm(n, b)
    tv = Fraction(0)
    for tup in product(sizes, repeat=b):
        left = dict(counts)
        ways = 1
        for s in tup:
            ways *= left[s]
            left[s] -= 1
        nu = Fraction(1)
        for s in tup:
            nu *= Fraction(counts[s], n)
        tv += abs(Fraction(ways, falling) - nu)
    return tv / 2, Fraction(b * b, 2 * n)


@dataclass(frozen=True)
class GapReport:
    gap: float
    stderr: float
    bound: Fraction
    algorithm: str

    @property
    def ok(self) -> bool:
        return self.gap <= float(self.bound) + 4 * self.stderr


def _dnf_of_rows(rows: np.ndarray, weights: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros(len(rows), dtype=np.int64)
    level = np.zeros(len(rows), dtype=np.int64)
    for k in range(rows.shape[1]):
        level += weights[rows[:, k]]
        full = level >= q
        out += full
        level[full] = 0
    return out


def expectation_gap_check(items, b: int, trials: int, seed=None, algorithm: str = "dnf", threads=None) -> GapReport:
    """|E[A(sigma(L)[1:b])] - E[A(I_b(F_L))]| estimated from independent samples."""
    items = _as_list(items)
    seed = _seed(seed)
    n = len(items)
    if not 1 <= b <= n:
        raise ValidationError("need 1 <= b <= N")
    q = items.scale()
    weights = np.asarray(items.int_items(q), dtype=np.int64)
    impl = kernels.backend()
    perm_rows = kernels.run_trials(lambda s0, c: impl.shuffled_prefixes(n, b, seed.seed, s0, c), trials, seed.stream, threads)
    # i.i.d. draws from F_L are uniform draws of list positions
    uniform = kernels.as_uint64(range(1, n + 1))
    other = seed.with_stream(seed.stream + trials)
    iid_rows = kernels.run_trials(lambda s0, c: impl.iid_indices(uniform, n, b, other.seed, s0, c), trials, other.stream, threads)
    if algorithm == "dnf":
        a = _dnf_of_rows(perm_rows, weights, q)
        c = _dnf_of_rows(iid_rows, weights, q)
    elif algorithm == "opt":
        if b > DEFAULT_OPT_CAP:
            raise TooLarge(f"b = {b} exceeds the exact OPT cap")
        opt = OptCache()
        a = np.array([opt([items[i] for i in row]) for row in perm_rows], dtype=np.int64)
        c = np.array([opt([items[i] for i in row]) for row in iid_rows], dtype=np.int64)
    else:
        raise ValidationError("algorithm must be 'dnf' or 'opt'")
    gap = abs(float(a.mean()) - float(c.mean()))
    se = math.sqrt(float(a.var(ddof=1)) / trials + float(c.var(ddof=1)) / trials) if trials > 1 else 0.0
    return GapReport(gap, se, Fraction(b**3, n), algorithm)


# -- i.i.d. inputs -------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureEquivalence:
    lhs: float  # mean of DNF/OPT
    lhs_stderr: float
    rhs: float  # mean DNF / mean OPT
    rhs_stderr: float
    overlap: bool
    trials: int
    resampled: int  # rows discarded because OPT(I_n) = 0


def measure_equivalence_check(dist: DiscreteDistribution, n: int, trials: int, seed=None, threads=None) -> MeasureEquivalence:
    """Compare E[DNF/OPT] with E[DNF]/E[OPT] on I_n, conditioning on OPT >= 1 by resampling."""
    if n > 14:
        raise TooLarge("measure_equivalence_check needs n <= 14 for exact OPT")
    seed = _seed(seed)
    q = dist.scale()
    weights = np.asarray(dist.int_sizes(), dtype=np.int64)
    opt = OptCache(max(n, DEFAULT_OPT_CAP))
    dnf_vals: list[np.ndarray] = []
    opt_vals: list[np.ndarray] = []
    kept, discarded, stream = 0, 0, seed.stream
    while kept < trials:
        batch = max(trials - kept, 64)
        rows = sample_matrix(dist, n, batch, seed.with_stream(stream), threads)
        stream += batch
        o = np.array([opt(tuple(dist.sizes[i] for i in row)) for row in rows], dtype=np.int64)
        good = o >= 1
        discarded += int((~good).sum())
        if discarded > 10 * trials + 1000:
            raise DnfCoverError("OPT(I_n) is almost always 0; increase n")
        take = np.flatnonzero(good)[: trials - kept]
        dnf_vals.append(_dnf_of_rows(rows[take], weights, q))
        opt_vals.append(o[take])
        kept += len(take)
    d = np.concatenate(dnf_vals).astype(np.float64)
    o = np.concatenate(opt_vals).astype(np.float64)
    ratio = d / o
    lhs = float(ratio.mean())
    lhs_se = float(ratio.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    md, mo = float(d.mean()), float(o.mean())
    rhs = md / mo
    if trials > 1:
        # delta method for a ratio of means
        cov = np.cov(d, o, ddof=1)
        var = (cov[0, 0] - 2 * rhs * cov[0, 1] + rhs * rhs * cov[1, 1]) / (mo * mo * trials)
        rhs_se = math.sqrt(max(var, 0.0))
    else:
        rhs_se = 0.0
    z = 1.96
    overlap = abs(lhs - rhs) <= z * (lhs_se + rhs_se) + 1e-12
    return MeasureEquivalence(lhs, lhs_se, rhs, rhs_se, overlap, trials, discarded)


@dataclass(frozen=True)
class LargeSmallDecomposition:
    """Items of the list realizing F split at 1/2, small side padded with zeros."""

    large: tuple[Fraction, ...]  # descending
    small: tuple[Fraction, ...]  # includes padding zeros
    padding: int

    @property
    def ell(self) -> int:
        return len(self.large)

    @property
    def n(self) -> int:
        return len(self.small)

    @property
    def b_star(self) -> Fraction:
        return self.large[math.ceil(self.ell / 2) - 1]

    @property
    def s_star(self) -> Fraction:
        return 1 - self.b_star

    @property
    def horizon(self) -> int:
        return 15 * self.n // self.ell

    @classmethod
    def of(cls, dist: DiscreteDistribution) -> "LargeSmallDecomposition":
        from .core import minimal_realizing_length, realizing_list

        items = realizing_list(dist, minimal_realizing_length(dist))
        large = tuple(sorted((x for x in items if x > Fraction(1, 2)), reverse=True))
        small = [x for x in items if x <= Fraction(1, 2)]
        if not large:
            raise NotApplicable("no large items (> 1/2)")
        if not any(small):
            raise NotApplicable("no positive small items; the event is degenerate")
        ell = len(large)
        target = max(len(small), ell)
        target = -(-target // ell) * ell
        pad = target - len(small)
        return cls(large, tuple(small) + (Fraction(0),) * pad, pad)


def event_ef_estimate(dist: DiscreteDistribution, trials: int, seed=None, threads=None) -> TrialReport:
    """P[first 15n/l draws are all small and sum to >= s_star] under uniform draws from the padded list."""
    seed = _seed(seed)
    dec = LargeSmallDecomposition.of(dist)
    pool = ItemList(dec.large + dec.small)
    q = ItemList(pool.items + (dec.s_star,)).scale()
    items = kernels.as_int64(pool.int_items(q))
    large = np.ascontiguousarray(np.array([1] * dec.ell + [0] * dec.n, dtype=np.uint8))
    s_star = int(dec.s_star * q)
    impl = kernels.backend()
    hits = kernels.run_trials(
        lambda s0, c: impl.ef_hits(items, large, dec.horizon, s_star, seed.seed, s0, c),
        trials,
        seed.stream,
        threads,
        combine="sum",
    )
    p = hits / trials
    se = math.sqrt(p * (1 - p) / trials) if trials > 1 else 0.0
    return TrialReport(p, se, trials, seed)


# -- dominated single-configuration family ---------------------------------------------------


def ttilde_convergence(m: int, eps_values, state_cap: int = 200_000) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(eps, exact E[T], ttilde(m)) for the geometric single-configuration family.

    Diagnostic only: E[T] should creep up to ttilde(m) as eps shrinks; no rate
    is asserted.
    """
    from .bounds import pp1_geometric, ttilde

    target = ttilde(m, "dominated")
    out = []
    for eps in eps_values:
        chain = build_chain(pp1_geometric(m, eps), state_cap)
        out.append((Fraction(eps), expected_items_per_bin(chain), target))
    return out
