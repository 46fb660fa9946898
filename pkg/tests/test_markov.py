from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings

from dnfcover.bounds import fmk_tail
from dnfcover.core import DiscreteDistribution, family_fmk, family_pptwo, family_uniform_discrete
from dnfcover.dnf import stopping_time_samples
from dnfcover.markov import (
    Periodic,
    StateExplosion,
    aecr_exact,
    analyze,
    build_chain,
    expected_items_per_bin,
    expected_overshoot,
    hitting_times,
    interval_period,
    period,
    stationary,
    stopping_time_tail,
)
from dnfcover.rng import RandomSeed

from .conftest import distributions

HALF = DiscreteDistribution.point(F(1, 2))


def U(*sizes):
    return DiscreteDistribution.uniform([F(s) for s in sizes])


def edges(chain):
    st = chain.states
    return {(st[i], st[j]): p for i, row in enumerate(chain.transitions) for j, p in row}


def test_build_examples(third):
    ch = build_chain(HALF)
    assert ch.states == ["c", F(1, 2)]
    assert edges(ch) == {("c", F(1, 2)): 1, (F(1, 2), "c"): 1}
    ch = build_chain(third)
    assert ch.states == ["c", F(1, 3), F(2, 3)]
    assert edges(ch) == {
        ("c", F(1, 3)): F(1, 2), ("c", F(2, 3)): F(1, 2),
        (F(1, 3), F(2, 3)): F(1, 2), (F(1, 3), "c"): F(1, 2),
        (F(2, 3), "c"): 1,
    }


def test_state_explosion():
    with pytest.raises(StateExplosion):
        build_chain(family_fmk(10, 10), state_cap=10**6)


def test_period_examples(third):
    assert period(build_chain(HALF)) == 2
    assert period(build_chain(U("1/3", "2/5"))) == 3
    assert period(build_chain(third)) == 1
    assert interval_period(U("1/3", "2/5")) == 3


def test_stationary_examples(third):
    with pytest.raises(Periodic):
        stationary(build_chain(HALF))
    pi = stationary(build_chain(third))
    assert pi.values == [F(4, 9), F(2, 9), F(3, 9)]
    assert stationary(build_chain(U("1/2", "1"))).values == [F(2, 3), F(1, 3)]


def test_expectations(third):
    assert expected_items_per_bin(build_chain(third)) == F(9, 4)
    assert expected_items_per_bin(build_chain(HALF)) == 2
    pp = family_pptwo([(F(9, 10), F(1, 10)), (F(6, 10), F(4, 10))])
    assert expected_items_per_bin(build_chain(pp)) <= 3
    assert expected_overshoot(build_chain(HALF)) == 0
    assert expected_overshoot(build_chain(DiscreteDistribution.point(F(2, 5)))) == F(1, 5)
    assert expected_overshoot(build_chain(third)) == F(1, 8)


def test_aecr_examples(third):
    assert aecr_exact(third) == (F(8, 9), "perfect-packing")
    assert aecr_exact(U("1/3", "2/5")) == (1, "periodic")
    assert aecr_exact(DiscreteDistribution.point(1))[0] == 1


def test_float_path_agrees():
    d = family_uniform_discrete(12)
    exact = analyze(d)
    flt = analyze(d, exact_cap=0)
    assert not flt.exact and exact.exact
    assert abs(flt.expected_T - float(exact.expected_T)) < 1e-10
    assert abs(flt.expected_overshoot - float(exact.expected_overshoot)) < 1e-10
    assert flt.stationary.residual <= 1e-12
    assert np.allclose(flt.stationary.values, [float(v) for v in exact.stationary.values], atol=1e-12)


@settings(max_examples=60)
@given(distributions(max_sizes=3))
def test_triangular_equals_dense_and_return_time(d):
    ch = build_chain(d)
    if period(ch) != 1:
        # periodic chains close every d items
        assert hitting_times(ch)[0] == period(ch)
        return
    tri = stationary(ch, method="triangular").values
    assert tri == stationary(ch, method="dense").values
    assert sum(tri) == 1
    # stationary probability of c is the inverse mean return time
    assert tri[0] == 1 / expected_items_per_bin(ch)
    res = analyze(d, with_aecr=False)
    assert res.wald_holds()


@settings(max_examples=40)
@given(distributions(max_sizes=3))
def test_tail_sums_to_expectation(d):
    ch = build_chain(d)
    et = expected_items_per_bin(ch)
    # sizes are at least 1/12, so T <= 12 and the tail sum is finite
    assert sum(stopping_time_tail(ch, i) for i in range(0, 13)) == et


@pytest.mark.parametrize("m,k", [(1, 3), (2, 3), (2, 4), (3, 5), (4, 6), (6, 4)])
def test_fmk_tail_formula_matches_chain(m, k):
    ch = build_chain(family_fmk(m, k))
    for i in range(2, k):
        assert stopping_time_tail(ch, i) == fmk_tail(m, k, i)


def test_chain_vs_monte_carlo(third):
    d = U("1/5", "1/2", "7/10")
    res = analyze(d)
    t, r, scale = stopping_time_samples(d, 200_000, RandomSeed(5))
    se = t.std() / np.sqrt(len(t))
    assert abs(t.mean() - float(res.expected_T)) < 4 * se
    assert abs(r.mean() / scale - float(res.expected_overshoot)) < 0.005
