"""The acceptance battery: thirteen numbered checks, each with a pass/fail verdict.

Reference values live in :data:`REFERENCES` so a harness self-test can corrupt
one and watch the matching criterion fail.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional


from . import bounds, experiments, markov, offline
from .core import (
    DiscreteDistribution,
    family_fmk,
    family_pp1,
    family_pptwo,
    family_uniform_discrete,
    realizing_list,
)
from .dnf import dnf, dnf_run, stopping_time_samples
from .rng import DEFAULT_SEED, RandomSeed

REFERENCES = {
    "aecr_third": Fraction(8, 9),
    "ET_third": Fraction(9, 4),
    "two_over_e": 2 / math.e,
    "two_over_e_tol": 0.005,
    "fmk_lower_min": 2.85,
    "fmk_aecr_max": 0.71,
    "pp1_upper": 0.736,
    "pp1_lower": 0.686,
    "constant_tol": 0.001,
    "pptwo_ET_max": Fraction(3),
    "pptwo_aecr_min": Fraction(2, 3),
    "parking": (1, 3, 16, 125, 1296, 16807),
    "cover_fail_max": 0.044,
}

BATTERY_SEED = 20240611
BATTERY_EXACT_CAP = 2_000
PPTWO_STATE_LIMIT = 5_000


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: Optional[float] = None
    quick: bool = False

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:g}s)" if self.limit else ""
        q = " [quick]" if self.quick else ""
        return f"[{verdict}] {self.number:2d}. {self.name}{q}: {self.detail}; {self.seconds:.2f}s{lim}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
            "limit": self.limit,
            "quick": self.quick,
        }


# -- battery ----------------------------------------------------------------------------


def _random_pp1(rng: random.Random) -> DiscreteDistribution:
    d = rng.choice([6, 8, 10, 12, 15, 20, 24])
    parts = []
    left = d
    while left:
        a = rng.randint(1, min(left, d - 1))
        parts.append(a)
        left -= a
    sizes = sorted(set(parts))
    return family_pp1([Fraction(a, d) for a in sizes], [parts.count(a) for a in sizes])


def _random_pptwo(rng: random.Random, max_pairs: int = 4, max_denom: int = 30) -> DiscreteDistribution:
    """Uniform distribution on m complementary pairs (g, 1 - g) with 1/2 < g < 1."""
    while True:
        m = rng.randint(1, max_pairs)
        larges = set()
        while len(larges) < m:
            d = rng.randint(3, max_denom)
            larges.add(Fraction(rng.randint(d // 2 + 1, d - 1), d))
        if any(1 - g in larges for g in larges):
            continue
        return family_pptwo(sorted(((g, 1 - g) for g in larges), reverse=True))


def _random_mixture(rng: random.Random) -> DiscreteDistribution:
    while True:
        d = rng.choice([6, 8, 10, 12])
        nums = sorted(rng.sample(range(1, d + 1), rng.randint(2, 4)))
        base = DiscreteDistribution.uniform([Fraction(a, d) for a in nums])
        configs = offline.enumerate_perfect_configs(base)
        if len(configs) < 2:
            continue
        chosen = rng.sample(configs, min(len(configs), rng.randint(2, 3)))
        mass = [0] * len(nums)
        for c in chosen:
            w = rng.randint(1, 4)
            for i, b in enumerate(c.counts):
                mass[i] += w * b
        total = sum(mass)
        support = [(base.sizes[i], Fraction(mass[i], total)) for i in range(len(nums)) if mass[i]]
        return DiscreteDistribution(tuple(s for s, _ in support), tuple(p for _, p in support))


def _random_non_pp(rng: random.Random) -> DiscreteDistribution:
    while True:
        d = rng.choice([5, 7, 9, 10, 11, 12])
        nums = sorted(rng.sample(range(1, d + 1), rng.randint(1, 3)))
        weights = [rng.randint(1, 5) for _ in nums]
        total = sum(weights)
        dist = DiscreteDistribution(tuple(Fraction(a, d) for a in nums), tuple(Fraction(w, total) for w in weights))
        if not offline.is_perfect_packing(dist).feasible:
            return dist


def battery(seed: int = BATTERY_SEED) -> list[tuple[str, DiscreteDistribution]]:
    """Deterministic list of named distributions, all exactly solvable."""
    rng = random.Random(seed)
    out: list[tuple[str, DiscreteDistribution]] = []
    out += [(f"uniform_discrete({k})", family_uniform_discrete(k)) for k in range(1, 17)]
    out += [(f"fmk({m},{k})", family_fmk(m, k)) for m in (1, 2, 3) for k in (3, 4, 5)]
    out += [(f"pp1_random_{i}", _random_pp1(rng)) for i in range(10)]
    out += [(f"pptwo_random_{i}", _random_pptwo(rng, 3, 12)) for i in range(10)]
    out += [(f"pp_mixture_{i}", _random_mixture(rng)) for i in range(10)]
    F = Fraction
    out += [
        ("uniform{2/5,1/2}", DiscreteDistribution.uniform([F(2, 5), F(1, 2)])),
        ("point(2/5)", DiscreteDistribution.point(F(2, 5))),
        ("point(3/7)", DiscreteDistribution.point(F(3, 7))),
    ]
    out += [(f"non_pp_random_{i}", _random_non_pp(rng)) for i in range(5)]
    out += [
        ("uniform{1/3,2/5}", DiscreteDistribution.uniform([F(1, 3), F(2, 5)])),
        ("point(1/3)", DiscreteDistribution.point(F(1, 3))),
        ("uniform{1/2,3/5}", DiscreteDistribution.uniform([F(1, 2), F(3, 5)])),
        ("uniform{1/4,3/11}", DiscreteDistribution.uniform([F(1, 4), F(3, 11)])),
    ]
    return out


@dataclass
class _Context:
    quick: bool
    seed: RandomSeed
    threads: Optional[int]
    refs: dict
    _battery: Optional[list] = field(default=None, repr=False)

    def trials(self, full: int) -> int:
        return max(full // 10, 1000) if self.quick else full

    def analyzed_battery(self):
        if self._battery is None:
            rows = []
            for name, dist in battery():
                res = markov.analyze(dist, exact_cap=BATTERY_EXACT_CAP)
                pp = offline.is_perfect_packing(dist).feasible
                rows.append((name, dist, res, pp))
            self._battery = rows
        return self._battery


# -- criteria --------------------------------------------------------------------------------


def _c1(ctx):
    F = DiscreteDistribution.uniform([Fraction(1, 3), Fraction(2, 3)])
    value, prov = markov.aecr_exact(F)
    trials = ctx.trials(1_000_000)
    t, _, _ = stopping_time_samples(F, trials, ctx.seed, ctx.threads)
    mean = float(t.mean())
    se = float(t.std(ddof=1)) / math.sqrt(trials)
    ref = ctx.refs["ET_third"]
    ok = value == ctx.refs["aecr_third"] and abs(mean - float(ref)) <= 4 * se
    return ok, f"AECR={value} ({prov}); MC E[T]={mean:.5f} se={se:.1e} vs {ref} over {trials} trials"


def _c2(ctx):
    vals = []
    worst_res = 0.0
    for k in (10, 20, 40, 80):
        chain = markov.build_chain(family_uniform_discrete(k))
        pi = markov.stationary(chain, method="float")
        worst_res = max(worst_res, pi.residual)
        ex = float(family_uniform_discrete(k).mean())
        vals.append(float(pi.closed()) / ex)  # AECR = pi(c) / E[X] on perfect-packing F
        exact, _ = markov.aecr_exact(family_uniform_discrete(k))
        if abs(float(exact) - vals[-1]) > 1e-9:
            return False, f"float and exact AECR disagree at k={k}"
    target = ctx.refs["two_over_e"]
    monotone = all(a > b for a, b in zip(vals, vals[1:]))
    gap = abs(vals[-1] - target)
    ok = monotone and gap <= ctx.refs["two_over_e_tol"] and worst_res <= 1e-12
    text = ", ".join(f"{v:.5f}" for v in vals)
    return ok, f"AECR(k=10,20,40,80)=({text}); |k=80 - 2/e|={gap:.5f} <= {ctx.refs['two_over_e_tol']}; residual {worst_res:.1e}"


def _c3(ctx):
    lower = bounds.fmk_lower_ET(10, 10)
    F = family_fmk(10, 10)
    trials = ctx.trials(1_000_000)
    t, _, _ = stopping_time_samples(F, trials, ctx.seed, ctx.threads)
    mean = float(t.mean())
    se = float(t.std(ddof=1)) / math.sqrt(trials)
    ratio = 2 / mean  # E[X] = 1/2
    ok = float(lower) >= ctx.refs["fmk_lower_min"] and mean >= float(lower) - 3 * se and ratio <= ctx.refs["fmk_aecr_max"]
    return ok, f"lower E[T]={float(lower):.4f}; MC E[T]={mean:.4f} se={se:.1e}; 2/E[T]={ratio:.4f}"


def _c4(ctx):
    up = bounds.pp1_upper_constant(30)
    lo = bounds.pp1_lower_constant(200)
    tol = ctx.refs["constant_tol"]
    up_lo, up_hi = (float(x) for x in up.constant_interval)
    lo_lo, lo_hi = (float(x) for x in lo.constant_interval)
    ok_up = abs(up_lo - ctx.refs["pp1_upper"]) <= tol and abs(up_hi - ctx.refs["pp1_upper"]) <= tol
    ok_lo = abs(lo_lo - ctx.refs["pp1_lower"]) <= tol and abs(lo_hi - ctx.refs["pp1_lower"]) <= tol
    ok_tt = all(bounds.ttilde(m) == bounds.ttilde_closed_form(m) for m in range(1, 26))
    ok_gen = all(bounds.ttilde(m, "general") == bounds.ttilde_closed_form(m, "general") for m in range(1, 26))
    ok = ok_up and ok_lo and ok_tt and ok_gen
    return ok, (
        f"upper inverse in [{up_lo:.6f}, {up_hi:.6f}]; lower constant in [{lo_lo:.6f}, {lo_hi:.6f}]; "
        f"ttilde = closed form for m=1..25: {ok_tt and ok_gen}"
    )


def _c5(ctx):
    rng = random.Random(BATTERY_SEED + 5)
    worst_T = Fraction(0)
    worst_aecr = Fraction(2)
    count = 0
    resampled = 0
    while count < 50:
        F = _random_pptwo(rng)
        chain = markov.build_chain(F)
        if len(chain) > PPTWO_STATE_LIMIT:
            resampled += 1
            continue
        et = markov.expected_items_per_bin(chain, exact_cap=PPTWO_STATE_LIMIT)
        aecr = 1 / (F.mean() * et)
        worst_T = max(worst_T, et)
        worst_aecr = min(worst_aecr, aecr)
        count += 1
    ok = worst_T <= ctx.refs["pptwo_ET_max"] and worst_aecr >= ctx.refs["pptwo_aecr_min"]
    # analytic chain: the 2^-i parts sum to 1/2 and every excess term is at most 2^-i
    terms = 60
    chain_ok = True
    for m in range(1, 11):
        ex_total = Fraction(0)
        for i in range(2, terms + 1):
            excess, geo = bounds.pptwo_chain_terms(m, i)
            chain_ok &= excess <= geo
            ex_total += excess
        tb = bounds.pptwo_ET_bound(m, terms)
        chain_ok &= tb.offset + tb.sum_interval[1] <= 3
    half = sum((Fraction(1, 2**i) for i in range(2, terms + 1)), Fraction(0))
    chain_ok &= Fraction(5, 2) + half <= 3
    ok = ok and chain_ok
    return ok, (
        f"50 instances ({resampled} resampled for size): max E[T]={float(worst_T):.4f}, "
        f"min AECR={float(worst_aecr):.4f}; analytic chain holds: {chain_ok}"
    )


def _c6(ctx):
    checked = 0
    bad = []
    for name, dist, res, pp in ctx.analyzed_battery():
        x = dist.max_size
        if not (pp and res.exact and x >= Fraction(1, 2)):
            continue
        checked += 1
        if res.expected_overshoot > bounds.lorden_overshoot_bound(dist):
            bad.append(f"{name}: E[R]")
        aecr = 1 / (dist.mean() * res.expected_T)
        if aecr < bounds.lorden_ratio_bound(x):
            bad.append(f"{name}: AECR")
    return not bad and checked > 0, f"{checked} distributions checked; violations: {bad or 'none'}"


def _c7(ctx):
    checked = 0
    worst = Fraction(0)
    bad = []
    for name, dist, res, pp in ctx.analyzed_battery():
        if not pp:
            continue
        checked += 1
        worst = max(worst, res.expected_overshoot)
        if not res.expected_overshoot < 1:
            bad.append(name)
    return not bad and checked > 0, f"{checked} perfect-packing distributions; max E[R]={float(worst):.4f}; violations: {bad or 'none'}"


def _c8(ctx):
    rows = ctx.analyzed_battery()
    exact = [r for r in rows if r[2].exact]
    bad = [name for name, _, res, _ in exact if not res.wald_holds()]
    ok = not bad and len(exact) >= 60
    return ok, f"{len(exact)} exactly solved chains; violations: {bad or 'none'}"


def _c9(ctx):
    counts = tuple(bounds.parking_count(n) for n in range(1, 7))
    ok = counts == tuple(ctx.refs["parking"]) and all(c == bounds.parking_formula(n) for n, c in enumerate(counts, 1))
    return ok, f"counts {counts}"


def _c10(ctx):
    b = bounds.cover_fail_bound(5)
    trials = ctx.trials(100_000)
    fails, n = bounds.cover_fail_rate(40, 5, trials, ctx.seed, ctx.threads)
    rate = fails / n
    cap = ctx.refs["cover_fail_max"]
    return b <= cap and rate <= cap, f"bound(5)={b:.5f}; MC failure rate {rate:.5f} over {n} vectors (n=40, length 200)"


TV_FIXTURES = [
    (Fraction(1), Fraction(0)),
    (Fraction(1), Fraction(1), Fraction(0)),
    (Fraction(1, 3), Fraction(2, 3), Fraction(1, 3), Fraction(2, 3)),
    (Fraction(1, 2),) * 5,
    (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(1, 4), Fraction(1, 2)),
    (Fraction(1, 10), Fraction(9, 10), Fraction(2, 5), Fraction(3, 5), Fraction(1, 10), Fraction(9, 10), Fraction(1, 2)),
    (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3), Fraction(2, 3), Fraction(2, 3), Fraction(1, 5), Fraction(4, 5), Fraction(0)),
    (Fraction(2, 5),) * 3 + (Fraction(3, 5),) * 3 + (Fraction(1, 2),) * 2,
]


def _c11(ctx):
    worst = Fraction(0)
    bad = []
    checks = 0
    for items in TV_FIXTURES:
        for b in range(1, min(3, len(items)) + 1):
            tv, bound = experiments.tv_prefix_check(items, b)
            checks += 1
            worst = max(worst, tv / bound)
            if tv > bound:
                bad.append((len(items), b))
    gaps = []
    trials = ctx.trials(20_000)
    for idx, items in enumerate(TV_FIXTURES[2:6]):
        for alg in ("dnf", "opt"):
            g = experiments.expectation_gap_check(items, 3, trials, ctx.seed.with_stream(idx * 10**7), alg, ctx.threads)
            gaps.append(g.ok)
    ok = not bad and all(gaps)
    return ok, f"{checks} TV checks, max tv/bound={float(worst):.3f}; {sum(gaps)}/{len(gaps)} expectation gaps within b^3/N + 4se"


def _c12(ctx):
    F = DiscreteDistribution.uniform([Fraction(1, 3), Fraction(2, 3)])
    target = float(ctx.refs["aecr_third"])
    trials = ctx.trials(20_000)
    devs, ests, below = [], [], True
    for n in (60, 120, 240, 480):
        rep = experiments.random_order_ratio_estimate(realizing_list(F, n), trials, ctx.seed, threads=ctx.threads)
        ests.append(rep.estimate)
        devs.append(abs(rep.estimate - target))
        below &= rep.estimate <= target + 4 * rep.stderr
    shrinking = devs[-1] < devs[0] and sum(b < a for a, b in zip(devs, devs[1:])) >= 2
    diag = [
        experiments.dnf_deviation_diagnostic(realizing_list(F, 90 * 2**t), ctx.trials(5_000), ctx.seed, ctx.threads)
        for t in range(6)
    ]
    bounded = max(diag[3:]) <= 2 * max(diag[:3]) + 1e-9
    ok = shrinking and below and bounded
    text = ", ".join(f"{e:.4f}" for e in ests)
    dtext = ", ".join(f"{d:.4f}" for d in diag)
    return ok, f"ROR(N=60..480)=({text}) -> {target:.4f}; deviation diagnostic over doublings ({dtext})"


def _random_list(rng: random.Random, n_max: int, denoms=(2, 3, 4, 5, 6)) -> list[Fraction]:
    n = rng.randint(0, n_max)
    out = []
    for _ in range(n):
        d = rng.choice(denoms)
        out.append(Fraction(rng.randint(0, d), d))
    return out


def _c13(ctx):
    rng = random.Random(BATTERY_SEED + 13)
    n = 1_000 if ctx.quick else 10_000
    fails = {"dnf_superadditive": 0, "opt_superadditive": 0, "dnf_monotone": 0, "shrink": 0, "conservation": 0}
    opt = offline.OptCache()
    for _ in range(n):
        a, b = _random_list(rng, 5), _random_list(rng, 5)
        if dnf(a) + dnf(b) > dnf(a + b):
            fails["dnf_superadditive"] += 1
        if opt(a) + opt(b) > opt(a + b):
            fails["opt_superadditive"] += 1
    for _ in range(n):
        big = _random_list(rng, 12)
        small = [Fraction(rng.randint(0, x.numerator), x.denominator) if x else x for x in big]
        if dnf(small) > dnf(big):
            fails["dnf_monotone"] += 1
    for _ in range(n):
        items = _random_list(rng, 9)
        h = offline.perfect_shrink(items)
        o = opt(items)
        if (
            len(h) != len(items)
            or any(x > y for x, y in zip(h, items))
            or opt(h.items) != o
            or h.total != o
        ):
            fails["shrink"] += 1
    for _ in range(n):
        items = _random_list(rng, 12)
        start = Fraction(rng.randint(0, 5), 6)
        run = dnf_run(start, items)
        if sum(items, Fraction(0)) + start != run.bins_closed + run.total_overshoot + run.final_level:
            fails["conservation"] += 1
    ok = not any(fails.values())
    return ok, f"{n} instances per property; violations {fails}"


CRITERIA: list[tuple[int, str, Callable, Optional[float]]] = [
    (1, "exact AECR of uniform{1/3,2/3} and MC E[T]", _c1, 10.0),
    (2, "discretized uniform AECR tends to 2/e", _c2, 120.0),
    (3, "fmk(10,10) upper-bound family", _c3, 60.0),
    (4, "single-configuration constants and recursion", _c4, None),
    (5, "two-size perfect packings: E[T] <= 3", _c5, 60.0),
    (6, "Lorden overshoot and ratio bounds", _c6, None),
    (7, "overshoot strictly below 1", _c7, None),
    (8, "Wald identity on every exact chain", _c8, None),
    (9, "parking function counts", _c9, 30.0),
    (10, "covering-vector failure bound and MC rate", _c10, 60.0),
    (11, "prefix TV and expectation gaps", _c11, None),
    (12, "random-order ratio and deviation trend", _c12, None),
    (13, "property suites", _c13, None),
]


def run_acceptance(
    quick: bool = False,
    seed: RandomSeed | None = None,
    only: Optional[set[int]] = None,
    references: Optional[dict] = None,
    threads: Optional[int] = None,
    echo: Optional[Callable[[str], None]] = None,
) -> list[CriterionResult]:
    refs = dict(REFERENCES)
    refs.update(references or {})
    ctx = _Context(quick, seed or RandomSeed(DEFAULT_SEED), threads, refs)
    results = []
    for number, name, fn, limit in CRITERIA:
        if only and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # report, never abort the battery
            ok, detail = False, f"error: {type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        if limit is not None and dt > limit:
            ok, detail = False, f"{detail}; runtime {dt:.1f}s over {limit:g}s"
        res = CriterionResult(number, name, bool(ok), detail, dt, limit, quick)
        results.append(res)
        if echo:
            echo(res.line())
    return results
