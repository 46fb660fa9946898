"""Offline optimum, perfect-packing certificates, degree, gamma and shrinking.

The perfect-packing test decides whether ``p`` lies in the cone spanned by the
perfect configurations ``{b : sum_i b_i s_i = 1}``.  It is an exact phase-one
LP solved by column generation: cheap one- and two-size configurations seed
the column pool, and a pricing oracle (a knapsack DP, or full enumeration when
the scale is too large for the DP) supplies any configuration with positive
reduced cost.  An infeasible final LP yields a Farkas vector ``y`` with
``y . b <= 0`` for every perfect configuration and ``y . p > 0``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Sequence

from .core import (
    CapExceeded,
    DiscreteDistribution,
    ItemList,
    PackingConfiguration,
    ValidationError,
    fmt,
)
from .lp import simplex
from .rng import DEFAULT_SEED, RandomSeed

DEFAULT_OPT_CAP = 16
DEFAULT_CONFIG_CAP = 100_000
DEFAULT_DEGREE_CAP = 20
DP_PRICING_LIMIT = 2_000_000  # scale * number of sizes


class TooLarge(CapExceeded):
    pass


# -- exact offline optimum -----------------------------------------------------


class _OptSolver:
    """Max number of covered bins for a multiset given as counts of distinct sizes.

    Sizes are integers (descending) on a scale where ``q`` is one bin.  The
    largest remaining item is either left unused or placed in a minimal
    covering bin; only minimal bins need to be tried since surplus items can
    always be left unused.
    """

    def __init__(self, weights: Sequence[int], q: int):
        self.w = list(weights)
        self.q = q
        self.memo: dict[tuple, tuple] = {}

    def _bins_with(self, counts, first):
        w, q = self.w, self.q
        avail = list(counts)
        avail[first] -= 1
        take = [0] * len(w)
        take[first] = 1

        def rec(idx, load):
            if load >= q:
                yield tuple(take)
                return
            for j in range(idx, len(w)):
                if avail[j]:
                    avail[j] -= 1
                    take[j] += 1
                    yield from rec(j, load + w[j])
                    take[j] -= 1
                    avail[j] += 1

        yield from rec(first, w[first])

    def best(self, counts: tuple) -> int:
        hit = self.memo.get(counts)
        if hit is not None:
            return hit[0]
        total = sum(c * w for c, w in zip(counts, self.w))
        ub = total // self.q
        if ub == 0:
            self.memo[counts] = (0, None)
            return 0
        first = next(i for i, c in enumerate(counts) if c)
        rest = list(counts)
        rest[first] -= 1
        value, choice = self.best(tuple(rest)), None
        if value < ub:
            for b in self._bins_with(counts, first):
                v = 1 + self.best(tuple(c - t for c, t in zip(counts, b)))
                if v > value:
                    value, choice = v, b
                    if value == ub:
                        break
        self.memo[counts] = (value, choice)
        return value

    def bins(self, counts: tuple) -> list[tuple]:
        out = []
        while True:
            value = self.best(counts)
            if value == 0:
                return out
            choice = self.memo[counts][1]
            if choice is None:
                first = next(i for i, c in enumerate(counts) if c)
                rest = list(counts)
                rest[first] -= 1
                counts = tuple(rest)
            else:
                out.append(choice)
                counts = tuple(c - t for c, t in zip(counts, choice))


def _as_list(items) -> ItemList:
    return items if isinstance(items, ItemList) else ItemList(tuple(items))


def _solver_for(items: ItemList, cap: int):
    nonzero = [x for x in items if x > 0]
    if len(nonzero) > cap:
        raise TooLarge(f"{len(nonzero)} items exceed the exact OPT cap of {cap}; use Monte Carlo or an LP bound")
    sizes = sorted(set(nonzero), reverse=True)
    q = ItemList(tuple(sizes)).scale() if sizes else 1
    solver = _OptSolver([int(s * q) for s in sizes], q)
    c = Counter(nonzero)
    return solver, sizes, tuple(c[s] for s in sizes)


def opt_exact(items, cap: int = DEFAULT_OPT_CAP) -> int:
    """Exact OPT(L): the maximum number of disjoint item sets each of total size >= 1."""
    solver, _, counts = _solver_for(_as_list(items), cap)
    return solver.best(counts)


def opt_packing(items, cap: int = DEFAULT_OPT_CAP) -> list[list[int]]:
    """An optimal packing as lists of item positions (one list per covered bin)."""
    items = _as_list(items)
    solver, sizes, counts = _solver_for(items, cap)
    free: dict[Fraction, list[int]] = {}
    for idx, x in enumerate(items):
        free.setdefault(x, []).append(idx)
    packing = []
    for b in solver.bins(counts):
        packing.append(sorted(free[s].pop() for s, k in zip(sizes, b) for _ in range(k)))
    return packing


class OptCache:
    """OPT memoized by item multiset; handy for repeated samples from one distribution."""

    def __init__(self, cap: int = DEFAULT_OPT_CAP):
        self.cap = cap
        self._memo: dict[tuple, int] = {}

    def __call__(self, items) -> int:
        key = tuple(sorted(items))
        v = self._memo.get(key)
        if v is None:
            v = self._memo[key] = opt_exact(key, self.cap)
        return v


# -- configurations ----------------------------------------------------------------


def _positive_sizes(dist: DiscreteDistribution):
    if dist.sizes[0] == 0:
        raise ValidationError("configuration enumeration needs positive sizes")
    return dist.int_sizes(), dist.scale()


def _enumerate(dist, cap, covering):
    w, q = _positive_sizes(dist)
    m = len(w)
    order = sorted(range(m), key=lambda i: -w[i])
    out = []
    b = [0] * m

    def rec(pos, load):
        if load >= q:
            if covering or load == q:
                out.append(tuple(b))
                if len(out) > cap:
                    raise CapExceeded(f"more than {cap} configurations")
            return
        for k in range(pos, m):
            i = order[k]
            if not covering and load + w[i] > q:
                continue
            b[i] += 1
            rec(k, load + w[i])
            b[i] -= 1

    rec(0, 0)
    kind = "covering" if covering else "perfect"
    return sorted((PackingConfiguration(c, kind) for c in out), key=lambda c: c.counts)


def enumerate_perfect_configs(dist: DiscreteDistribution, cap: int = DEFAULT_CONFIG_CAP):
    """Every b >= 0 with sum_i b_i s_i = 1 exactly."""
    return _enumerate(dist, cap, covering=False)


def enumerate_covering_configs(dist: DiscreteDistribution, cap: int = DEFAULT_CONFIG_CAP):
    """Every minimal cover: load >= 1 and dropping any single item leaves load < 1."""
    return _enumerate(dist, cap, covering=True)


def _seed_configs(w, q):
    """One-size configurations and the two extreme solutions of every two-size equation."""
    m = len(w)
    out = set()
    for i in range(m):
        if q % w[i] == 0:
            b = [0] * m
            b[i] = q // w[i]
            out.add(tuple(b))
    for i in range(m):
        for j in range(m):
            if w[i] >= w[j] or i == j:
                continue
            # b_i w_i + b_j w_j = q with w_i < w_j; b_j runs over one residue class
            g = gcd(w[i], w[j])
            if q % g:
                continue
            mod = w[i] // g
            r = ((q // g) * pow(w[j] // g, -1, mod)) % mod if mod > 1 else 0
            top = q // w[j]
            hi = top - ((top - r) % mod) if top >= r else None
            for bj in {r, hi}:
                if bj is None or bj < 0 or bj * w[j] > q:
                    continue
                rest = q - bj * w[j]
                if rest % w[i]:
                    continue
                b = [0] * m
                b[i], b[j] = rest // w[i], bj
                out.add(tuple(b))
    return sorted(out)


def _price_dp(w, q, y):
    """Max y . b over perfect configurations via an exact-fill unbounded knapsack."""
    best = [None] * (q + 1)
    arg = [None] * (q + 1)
    best[0] = Fraction(0)
    for cap in range(1, q + 1):
        for i, wi in enumerate(w):
            if wi <= cap and best[cap - wi] is not None:
                v = best[cap - wi] + y[i]
                if best[cap] is None or v > best[cap]:
                    best[cap], arg[cap] = v, i
    if best[q] is None:
        return None, None
    b = [0] * len(w)
    cap = q
    while cap:
        b[arg[cap]] += 1
        cap -= w[arg[cap]]
    return best[q], tuple(b)


@dataclass(frozen=True)
class PerfectPackingCertificate:
    sizes: tuple[Fraction, ...]
    probs: tuple[Fraction, ...]
    configurations: tuple[PackingConfiguration, ...]
    coefficients: tuple[Fraction, ...]
    feasible: bool = field(default=True, init=False)

    def residual(self) -> tuple[Fraction, ...]:
        return tuple(
            sum((a * c.counts[i] for a, c in zip(self.coefficients, self.configurations)), Fraction(0)) - p
            for i, p in enumerate(self.probs)
        )

    def verify(self) -> bool:
        return (
            all(a > 0 for a in self.coefficients)
            and all(c.load(self.sizes) == 1 for c in self.configurations)
            and not any(self.residual())
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "perfect-packing-certificate",
            "sizes": [fmt(s) for s in self.sizes],
            "probs": [fmt(p) for p in self.probs],
            "configurations": [list(c.counts) for c in self.configurations],
            "coefficients": [fmt(a) for a in self.coefficients],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Refutation:
    """Farkas vector: y . b <= 0 for all perfect configurations b, y . p > 0."""

    sizes: tuple[Fraction, ...]
    probs: tuple[Fraction, ...]
    y: tuple[Fraction, ...]
    feasible: bool = field(default=False, init=False)

    def margin(self) -> Fraction:
        return sum((a * b for a, b in zip(self.y, self.probs)), Fraction(0))

    def verify(self, configs: Sequence[PackingConfiguration]) -> bool:
        ok = all(sum(a * b for a, b in zip(self.y, c.counts)) <= 0 for c in configs)
        return ok and self.margin() > 0

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "refutation",
            "sizes": [fmt(s) for s in self.sizes],
            "probs": [fmt(p) for p in self.probs],
            "y": [fmt(v) for v in self.y],
        }


def _phase_one(columns, probs):
    m = len(probs)
    a = [[col[i] for col in columns] for i in range(m)]
    return simplex(a, list(probs))


@lru_cache(maxsize=512)
def is_perfect_packing(dist: DiscreteDistribution, cap: int = DEFAULT_CONFIG_CAP):
    """Certificate (``feasible=True``) or refutation (``feasible=False``) for p in the perfect cone."""
    w, q = _positive_sizes(dist)
    m = len(w)
    columns = _seed_configs(w, q)
    enumerated = None
    use_dp = q * m <= DP_PRICING_LIMIT
    while True:
        res = _phase_one(columns, dist.probs) if columns else None
        if res is not None and res.status == "optimal":
            support = [(a, col) for a, col in zip(res.x, columns) if a > 0]
            cert = PerfectPackingCertificate(
                dist.sizes,
                dist.probs,
                tuple(PackingConfiguration(col, "perfect") for _, col in support),
                tuple(a for a, _ in support),
            )
            assert cert.verify()
            return cert
        y = tuple(res.duals) if res is not None else tuple(Fraction(1) for _ in range(m))
        if use_dp:
            value, col = _price_dp(w, q, y)
        else:
            if enumerated is None:
                enumerated = [c.counts for c in enumerate_perfect_configs(dist, cap)]
            col, value = None, None
            for c in enumerated:
                v = sum(a * b for a, b in zip(y, c))
                if value is None or v > value:
                    value, col = v, c
        if col is None or value <= 0:
            return Refutation(dist.sizes, dist.probs, y)
        if col in columns:  # cannot happen with exact pricing; guards against a cycle
            raise RuntimeError("pricing returned an existing column")
        columns.append(col)


# -- degree ------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeResult:
    degree: int
    witness: PerfectPackingCertificate


def degree(dist: DiscreteDistribution, cap: int = DEFAULT_DEGREE_CAP) -> DegreeResult:
    """Smallest number of perfect configurations whose nonnegative mix equals p."""
    cert = is_perfect_packing(dist)
    if not cert.feasible:
        raise ValidationError(f"{dist} is not a perfect-packing distribution")
    try:
        configs = enumerate_perfect_configs(dist, cap=cap)
    except CapExceeded:
        raise CapExceeded(
            f"more than {cap} perfect configurations for subset search; "
            f"degree <= {len(cert.configurations)} by the certificate"
        ) from None
    for k in range(1, len(cert.configurations) + 1):
        for subset in combinations(configs, k):
            res = _phase_one([c.counts for c in subset], dist.probs)
            if res.status == "optimal" and all(a > 0 for a in res.x):
                witness = PerfectPackingCertificate(dist.sizes, dist.probs, tuple(subset), tuple(res.x))
                assert witness.verify()
                return DegreeResult(k, witness)
    return DegreeResult(len(cert.configurations), cert)


# -- gamma ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaEstimate:
    value: Fraction | float
    provenance: str  # "exact-perfect-packing" | "lp-bound" | "monte-carlo"
    error_bar: float = 0.0
    lower: float | Fraction | None = None  # Monte Carlo lower estimate, if computed
    upper: Fraction | None = None  # LP upper bound, if computed

    @property
    def interval(self):
        return (self.lower, self.upper)


def covering_lp_bound(dist: DiscreteDistribution, cap: int = DEFAULT_CONFIG_CAP) -> Fraction:
    """max sum x_b subject to sum_b x_b b <= p over minimal covering configurations."""
    configs = [c.counts for c in enumerate_covering_configs(dist, cap)]
    m, k = len(dist), len(configs)
    a = [[c[i] for c in configs] + [1 if j == i else 0 for j in range(m)] for i in range(m)]
    cost = [-1] * k + [0] * m
    res = simplex(a, list(dist.probs), cost)
    if res.status != "optimal":
        raise RuntimeError(f"covering LP {res.status}")
    return -res.value


def gamma_rate(
    dist: DiscreteDistribution,
    mc_trials: int = 0,
    n: int = 12,
    seed: RandomSeed | None = None,
    cap: int = DEFAULT_CONFIG_CAP,
) -> GammaEstimate:
    """Asymptotic OPT bins per item.

    Exact E[X] for perfect-packing distributions.  Otherwise the covering LP
    value (an upper bound) together with, when ``mc_trials > 0``, the lower
    estimate mean(OPT(I_n))/n, which is valid because OPT is superadditive.
    """
    if is_perfect_packing(dist).feasible:
        ex = dist.mean()
        return GammaEstimate(ex, "exact-perfect-packing", 0.0, ex, ex)
    upper = covering_lp_bound(dist, cap)
    lower, err = None, 0.0
    if mc_trials > 0:
        from .experiments import sample_matrix

        seed = seed or RandomSeed(DEFAULT_SEED)
        opt = OptCache(max(n, DEFAULT_OPT_CAP))
        rows = sample_matrix(dist, n, mc_trials, seed)
        vals = [opt([dist.sizes[i] for i in row]) / n for row in rows]
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / max(len(vals) - 1, 1)
        lower, err = mean, (var / len(vals)) ** 0.5
    return GammaEstimate(upper, "lp-bound", err, lower, upper)


def opt_via_certificate(items) -> int | None:
    """s(L) when the list splits into whole perfect configurations, else None.

    Scales the perfect-packing certificate of the induced distribution by the
    number of nonzero items; integral multipliers give a zero-waste packing, so
    OPT(L) = s(L).  This is a sufficient test only.
    """
    nonzero = [x for x in _as_list(items) if x > 0]
    if not nonzero:
        return 0
    from .core import induced_distribution

    cert = is_perfect_packing(induced_distribution(nonzero))
    if not cert.feasible:
        return None
    mult = [a * len(nonzero) for a in cert.coefficients]
    if any(v.denominator != 1 for v in mult):
        return None
    total = sum(nonzero, Fraction(0))
    return int(total) if total.denominator == 1 else None


def opt_value(items, cap: int = DEFAULT_OPT_CAP) -> int:
    """OPT(L) by exhaustive search when small, else by a closed form or a perfect decomposition."""
    items = _as_list(items)
    nonzero = [x for x in items if x > 0]
    if len(nonzero) <= cap:
        return opt_exact(items, cap)
    if len(set(nonzero)) == 1:
        per_bin = -(-1 // nonzero[0])  # ceil(1/s) items cover one bin
        return len(nonzero) // per_bin
    v = opt_via_certificate(items)
    if v is None:
        raise TooLarge(f"list of {len(items)} items is beyond the exact cap and not perfectly decomposable")
    return v


# -- worst-case reduction ------------------------------------------------------------


def perfect_shrink(items, cap: int = DEFAULT_OPT_CAP) -> ItemList:
    """Item-wise smaller list H with OPT(H) = OPT(L) and zero OPT waste.

    Takes an optimal packing of L, trims each covered bin to load exactly 1
    by reducing its items largest first, and sets every unpacked item to 0.
    """
    items = _as_list(items)
    out = [Fraction(0)] * len(items)
    for bin_ in opt_packing(items, cap):
        excess = sum((items[i] for i in bin_), Fraction(0)) - 1
        for i in sorted(bin_, key=lambda i: (-items[i], i)):
            cut = min(excess, items[i])
            out[i] = items[i] - cut
            excess -= cut
    return ItemList(tuple(out))
