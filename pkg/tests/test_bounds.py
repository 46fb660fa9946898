import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dnfcover.bounds import (
    CONSTRUCTIONS,
    OutOfValidatedRange,
    constants_table,
    cover_fail_bound,
    cover_fail_rate,
    covers,
    fmk_lower_ET,
    fmk_tail,
    lorden_overshoot_bound,
    lorden_ratio_bound,
    parking_count,
    parking_formula,
    pp1_geometric,
    pp1_lower_constant,
    pp1_upper_constant,
    pptwo_chain_terms,
    pptwo_ET_bound,
    pptwo_tail,
    ttilde,
    ttilde_closed_form,
)
from dnfcover.core import DiscreteDistribution, ValidationError, family_fmk, family_pptwo
from dnfcover.dnf import stopping_time_samples
from dnfcover.markov import analyze, build_chain, expected_items_per_bin, expected_overshoot
from dnfcover.rng import RandomSeed

from .conftest import distributions


class TestSeries:
    def test_upper(self):
        assert pp1_upper_constant(1).truncated_sum == 1
        assert pp1_upper_constant(2).truncated_sum == F(5, 4)
        v = pp1_upper_constant(30)
        assert abs(v.constant - 0.736) <= 0.001
        lo, hi = v.constant_interval
        assert hi - lo < 1e-12

    def test_lower(self):
        assert pp1_lower_constant(2).truncated_sum == F(1, 4)
        assert pp1_lower_constant(2).truncated_constant == F(4, 5)
        assert pp1_lower_constant(3).truncated_sum == F(1, 4) + F(2, 27)
        v = pp1_lower_constant(200)
        assert abs(v.constant - 0.686) <= 0.001
        lo, hi = v.constant_interval
        assert 0.685 < lo < hi < 0.687

    @pytest.mark.parametrize("n", [5, 20, 60])
    def test_enclosures_contain_longer_sums(self, n):
        # the enclosure after n terms must contain every longer partial sum's enclosure
        for fn in (pp1_upper_constant, pp1_lower_constant):
            a, b = fn(n).sum_interval, fn(4 * n).sum_interval
            assert a[0] <= b[0] and b[1] <= a[1]

    def test_bad_terms(self):
        with pytest.raises(ValidationError):
            pp1_upper_constant(0)
        with pytest.raises(ValidationError):
            pp1_lower_constant(1)


class TestTtilde:
    def test_examples(self):
        assert ttilde(1) == 1
        assert ttilde(2) == F(5, 2) == 2 * (1 + F(1, 4))
        assert ttilde(3) == 3 * (1 + F(1, 4) + F(2, 27))

    @given(st.integers(1, 25), st.sampled_from(CONSTRUCTIONS))
    def test_closed_form(self, m, construction):
        assert ttilde(m, construction) == ttilde_closed_form(m, construction)

    def test_constructions_diverge_at_four(self):
        assert ttilde(3, "dominated") == ttilde(3, "general")
        assert ttilde(4, "dominated") == F(4657, 864)
        assert ttilde(4, "general") == F(9395, 1728)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_geometric_family_approaches_dominated(self, m):
        target = ttilde(m)
        prev = None
        for eps in (F(1, 3), F(1, 5), F(1, 9)):
            et = expected_items_per_bin(build_chain(pp1_geometric(m, eps)))
            assert et <= target
            if prev is not None:
                assert et >= prev
            prev = et
        assert target - prev < F(1, 4)


class TestLorden:
    def test_ratio(self):
        assert lorden_ratio_bound(F(1, 2)) == F(2, 3)
        assert lorden_ratio_bound(1) == F(1, 2)
        assert lorden_ratio_bound(F(3, 4)) == F(8, 13)
        with pytest.raises(ValidationError):
            lorden_ratio_bound(F(1, 3))

    def test_overshoot_examples(self, third):
        assert lorden_overshoot_bound(DiscreteDistribution.point(F(1, 2))) == F(1, 2)
        assert lorden_overshoot_bound(third) == F(5, 9)
        assert lorden_overshoot_bound(DiscreteDistribution.point(1)) == 1

    @given(distributions(max_sizes=3))
    def test_overshoot_bound_holds(self, d):
        assert expected_overshoot(build_chain(d)) <= lorden_overshoot_bound(d)


class TestTails:
    def test_examples(self):
        assert fmk_tail(1, 5, 2) == F(1, 4)
        assert fmk_tail(2, 5, 2) == F(3, 8)
        assert pptwo_tail(1, 2) == F(1, 4)
        assert pptwo_tail(2, 3) == F(11, 64)
        with pytest.raises(OutOfValidatedRange):
            fmk_tail(2, 5, 5)
        with pytest.raises(OutOfValidatedRange):
            fmk_tail(2, 5, 1)

    def test_fmk_lower_bound(self):
        v = fmk_lower_ET(10, 10)
        assert float(v) == pytest.approx(2.9249, abs=1e-4)
        for m, k in [(2, 3), (3, 5), (4, 6)]:
            assert fmk_lower_ET(m, k) <= analyze(family_fmk(m, k), with_aecr=False).expected_T

    @pytest.mark.parametrize("m,k", [(3, 6), (6, 5)])
    def test_fmk_tail_monte_carlo(self, m, k):
        d = family_fmk(m, k)
        t, _, _ = stopping_time_samples(d, 200_000, RandomSeed(9))
        for i in range(2, k):
            p = float(fmk_tail(m, k, i))
            emp = float((t > i).mean())
            assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / len(t)) + 1e-9

    def test_pptwo_bound(self):
        for m in (1, 2, 4, 8):
            v = pptwo_ET_bound(m)
            assert v.offset + v.sum_interval[1] <= 3
            for i in range(2, 40):
                excess, half = pptwo_chain_terms(m, i)
                assert 0 <= excess <= half

    def test_pptwo_exact_below_three(self):
        pairs = [(F(9, 10), F(1, 10)), (F(6, 10), F(4, 10)), (F(7, 10), F(3, 10))]
        assert analyze(family_pptwo(pairs), with_aecr=False).expected_T <= 3


class TestCovering:
    def test_covers(self):
        assert covers((2, 1), 2)
        assert not covers((1, 1), 2)
        assert covers((2, 2, 3), 3)
        with pytest.raises(ValidationError):
            covers((0, 1), 2)

    def test_parking(self):
        assert [parking_count(n) for n in (1, 2, 3)] == [1, 3, 16]
        for n in range(1, 7):
            assert parking_count(n) == parking_formula(n)
        with pytest.raises(OutOfValidatedRange):
            parking_count(8)

    def test_fail_bound(self):
        assert cover_fail_bound(5) <= 0.044
        assert cover_fail_bound(10) < cover_fail_bound(5)
        with pytest.raises(ValidationError):
            cover_fail_bound(4)

    def test_fail_rate_under_bound(self):
        fails, trials = cover_fail_rate(20, 5, 20_000, RandomSeed(1))
        rate = fails / trials
        assert rate <= cover_fail_bound(5) + 3 * math.sqrt(cover_fail_bound(5) / trials)


def test_constants_table():
    rows = constants_table()
    assert len(rows) == 6
    assert all(r["status"] == "pass" for r in rows), rows
