import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnfcover.core import (
    CapExceeded,
    DiscreteDistribution,
    ItemList,
    ValidationError,
    family_fmk,
    family_pp1,
    family_pptwo,
    family_uniform_discrete,
    realizing_list,
)
from dnfcover.dnf import dnf, waste
from dnfcover.offline import (
    OptCache,
    TooLarge,
    covering_lp_bound,
    degree,
    enumerate_covering_configs,
    enumerate_perfect_configs,
    gamma_rate,
    is_perfect_packing,
    opt_exact,
    opt_packing,
    opt_value,
    opt_via_certificate,
    perfect_shrink,
)
from dnfcover.rng import RandomSeed

from .conftest import distributions, item_lists


def L(*xs):
    return ItemList(tuple(F(x) for x in xs))


def U(*sizes):
    return DiscreteDistribution.uniform([F(s) for s in sizes])


def brute_opt(items):
    """Oracle: every partition of the items into unlabelled groups plus a discard pile."""
    items = list(items)

    def rec(i, loads):
        if i == len(items):
            return sum(1 for v in loads if v >= 1)
        x = items[i]
        best = rec(i + 1, loads)  # discard
        for j in range(len(loads)):
            loads[j] += x
            best = max(best, rec(i + 1, loads))
            loads[j] -= x
        return max(best, rec(i + 1, loads + [x]))

    return rec(0, [])


class TestOpt:
    def test_examples(self):
        assert opt_exact(L("1/2", "1/2", "1/2")) == 1
        assert opt_exact(L("9/10", "1/10", "8/10", "2/10", "7/10", "3/10")) == 3
        assert opt_exact(L("3/5", "3/5", "3/5", "3/5")) == 2
        assert opt_exact(L("2/5", "2/5", "2/5", "2/5", "2/5")) == 1
        assert opt_exact([]) == 0

    def test_too_large(self):
        with pytest.raises(TooLarge):
            opt_exact([F(1, 3)] * 17)
        # zero items do not count against the cap
        assert opt_exact([F(0)] * 30 + [F(1)]) == 1

    @settings(max_examples=100)
    @given(item_lists(max_size=7))
    def test_against_brute_force(self, items):
        assert opt_exact(items) == brute_opt(items)

    @given(item_lists(max_size=12))
    def test_packing_is_valid(self, items):
        pk = opt_packing(items)
        assert len(pk) == opt_exact(items)
        used = [i for b in pk for i in b]
        assert len(used) == len(set(used))
        assert all(sum(items[i] for i in b) >= 1 for b in pk)

    @given(item_lists(max_size=12))
    def test_dominates_dnf_and_volume(self, items):
        o = opt_exact(items)
        assert dnf(items) <= o <= sum(items, F(0))

    def test_opt_value_paths(self):
        assert opt_value([F(2, 5)] * 20) == 6
        lst = realizing_list(family_fmk(2, 3), 40)
        assert opt_value(lst) == opt_via_certificate(lst) == 20
        with pytest.raises(TooLarge):
            opt_value([F(2, 5)] * 10 + [F(1, 2)] * 10)

    def test_cache(self):
        c = OptCache()
        assert c([F(1, 2), F(1, 2)]) == c((F(1, 2), F(1, 2))) == 1


class TestConfigurations:
    def test_examples(self, third):
        assert [c.counts for c in enumerate_perfect_configs(third)] == [(1, 1), (3, 0)]
        assert [c.counts for c in enumerate_perfect_configs(U("2/5", "1/2"))] == [(0, 2)]
        assert [c.counts for c in enumerate_perfect_configs(DiscreteDistribution.point(1))] == [(1,)]

    def test_cap(self):
        with pytest.raises(CapExceeded):
            enumerate_perfect_configs(family_uniform_discrete(12), cap=10)

    @settings(max_examples=50)
    @given(distributions(max_sizes=3))
    def test_against_brute_force(self, d):
        w = d.int_sizes()
        q = d.scale()
        ranges = [range(q // x + 2) for x in w]
        perfect, covering = set(), set()
        for b in itertools.product(*ranges):
            load = sum(k * x for k, x in zip(b, w))
            if load == q:
                perfect.add(b)
            if load >= q and all(load - x < q for k, x in zip(b, w) if k):
                covering.add(b)
        assert {c.counts for c in enumerate_perfect_configs(d)} == perfect
        assert {c.counts for c in enumerate_covering_configs(d)} == covering


class TestPerfectPacking:
    def test_examples(self, third):
        cert = is_perfect_packing(third)
        assert cert.feasible and cert.verify()
        assert [c.counts for c in cert.configurations] == [(1, 1)]
        assert cert.coefficients == (F(1, 2),)
        ref = is_perfect_packing(U("2/5", "1/2"))
        assert not ref.feasible
        assert ref.verify(enumerate_perfect_configs(U("2/5", "1/2")))
        assert is_perfect_packing(family_uniform_discrete(4)).feasible

    @pytest.mark.parametrize("m,k", [(1, 3), (2, 3), (3, 4), (2, 7), (5, 3)])
    def test_fmk(self, m, k):
        assert is_perfect_packing(family_fmk(m, k)).verify()

    @settings(max_examples=60)
    @given(distributions(max_sizes=3))
    def test_certificate_or_refutation_checks(self, d):
        res = is_perfect_packing(d)
        if res.feasible:
            assert res.verify()
        else:
            assert res.verify(enumerate_perfect_configs(d))

    def test_json(self, third):
        data = is_perfect_packing(third).to_dict()
        assert data["schema_version"] == 1 and data["coefficients"] == ["1/2"]


class TestDegree:
    def test_examples(self, third):
        r = degree(family_pp1([F(1, 3), F(2, 3)], (1, 1)))
        assert r.degree == 1 and [c.counts for c in r.witness.configurations] == [(1, 1)]
        r = degree(family_pptwo([(F(9, 10), F(1, 10)), (F(6, 10), F(4, 10))]))
        assert r.degree == 2
        assert {c.counts for c in r.witness.configurations} == {(1, 0, 0, 1), (0, 1, 1, 0)}
        assert degree(DiscreteDistribution.point(1)).degree == 1

    def test_errors(self):
        with pytest.raises(ValidationError):
            degree(U("2/5", "1/2"))
        with pytest.raises(CapExceeded, match="degree <="):
            degree(family_uniform_discrete(12), cap=5)


class TestGamma:
    def test_examples(self, third):
        g = gamma_rate(third)
        assert (g.value, g.provenance) == (F(1, 2), "exact-perfect-packing")
        g = gamma_rate(DiscreteDistribution.point(F(2, 5)), mc_trials=200, n=12)
        assert g.provenance == "lp-bound" and g.value == F(1, 3)
        # OPT of twelve items of size 2/5 is exactly 4
        assert g.lower == pytest.approx(1 / 3)
        assert gamma_rate(family_uniform_discrete(4)).value == F(5, 8)

    def test_lp_bound_dominates_mc(self):
        d = U("2/5", "1/2", "7/10")
        assert not is_perfect_packing(d).feasible
        g = gamma_rate(d, mc_trials=300, n=12, seed=RandomSeed(4))
        assert g.upper == covering_lp_bound(d)
        assert g.lower <= float(g.upper) + 3 * g.error_bar
        assert g.interval == (g.lower, g.upper)


class TestShrink:
    def test_examples(self):
        h = perfect_shrink(L("3/5", "3/5", "3/5", "3/5"))
        assert sorted(h) == [F(2, 5)] * 2 + [F(3, 5)] * 2
        assert opt_exact(h) == 2 and waste(2, h) == 0
        assert perfect_shrink(L(1, 1)) == L(1, 1)
        assert perfect_shrink(L("1/2", "1/2", "1/3")) == L("1/2", "1/2", 0)

    @given(item_lists(max_size=10))
    def test_properties(self, items):
        h = perfect_shrink(items)
        o = opt_exact(items)
        assert all(0 <= y <= x for x, y in zip(items, h))
        assert opt_exact(h) == o
        assert sum(h, F(0)) == o
        # DNF is monotone, so shrinking cannot raise the online count
        assert dnf(h) <= dnf(items)


@given(st.integers(1, 3), st.integers(3, 5), st.integers(1, 3))
def test_certificate_opt_on_fmk_lists(m, k, j):
    d = family_fmk(m, k)
    lst = realizing_list(d, 2 * m * j)
    assert opt_via_certificate(lst) == sum(lst, F(0))
