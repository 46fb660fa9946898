import json
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dnfcover.core import (
    DiscreteDistribution,
    EmptyList,
    ItemList,
    NotPerfectConfiguration,
    NotRealizable,
    PackingConfiguration,
    ValidationError,
    family_fmk,
    family_pp1,
    family_pptwo,
    family_uniform_discrete,
    induced_distribution,
    minimal_realizing_length,
    rational,
    realizing_list,
    sample_iid,
)
from dnfcover.rng import RandomSeed

from .conftest import distributions, item_lists


def D(sizes, probs):
    return DiscreteDistribution(tuple(map(F, sizes)), tuple(map(F, probs)))


class TestRational:
    def test_parsing(self):
        assert rational("2/4") == F(1, 2)
        assert rational(3) == 3

    def test_floats_rejected(self):
        with pytest.raises(ValidationError):
            rational(0.5)
        with pytest.raises(ValidationError):
            rational(True)


class TestDistribution:
    def test_sorted_and_exact(self):
        d = D(["2/3", "1/3"], ["1/4", "3/4"])
        assert d.sizes == (F(1, 3), F(2, 3))
        assert d.probs == (F(3, 4), F(1, 4))
        assert sum(d.probs) == 1

    @pytest.mark.parametrize(
        "sizes,probs",
        [
            (["1/2", "1/2"], ["1/2", "1/2"]),  # duplicate sizes
            (["1/2"], ["1/2"]),  # sum != 1
            (["3/2"], ["1"]),  # size > 1
            (["1/2", "1/3"], ["1", "0"]),  # zero probability
            (["0", "1"], ["1/2", "1/2"]),  # zero size without the flag
        ],
    )
    def test_invalid(self, sizes, probs):
        with pytest.raises(ValidationError):
            D(sizes, probs)

    def test_zero_size_flag(self):
        d = DiscreteDistribution((F(0), F(1)), (F(1, 2), F(1, 2)), allow_zero=True)
        assert d.sizes[0] == 0

    def test_json_roundtrip(self, third):
        text = third.to_json()
        assert json.loads(text) == {"sizes": ["1/3", "2/3"], "probs": ["1/2", "1/2"]}
        assert DiscreteDistribution.from_json(text) == third

    @pytest.mark.parametrize(
        "text",
        [
            '{"sizes": [0.5], "probs": ["1"]}',
            '{"sizes": ["1/2", "2/4"], "probs": ["1/2", "1/2"]}',
            '{"sizes": ["1/2"]}',
            "not json",
            '{"sizes": ["1/3", "2/3"], "probs": ["1/2", "1/3"]}',
        ],
    )
    def test_json_rejects(self, text):
        with pytest.raises(ValidationError):
            DiscreteDistribution.from_json(text)

    @given(distributions())
    def test_moments(self, d):
        assert sum(d.probs) == 1
        assert d.mean() == sum(s * p for s, p in zip(d.sizes, d.probs))
        cum, denom = d.prob_weights()
        assert cum[-1] == denom


class TestInducedAndRealizing:
    def test_examples(self):
        assert induced_distribution(ItemList.of(F(1, 2), F(1, 2), F(1, 3))) == D(["1/3", "1/2"], ["1/3", "2/3"])
        assert induced_distribution([1]) == D(["1"], ["1"])
        assert induced_distribution([F(1, 4), F(3, 4), F(1, 4), F(3, 4)]) == D(["1/4", "3/4"], ["1/2", "1/2"])

    def test_empty(self):
        with pytest.raises(EmptyList):
            induced_distribution([])

    def test_realizing(self, third):
        assert realizing_list(third, 4).items == (F(1, 3), F(1, 3), F(2, 3), F(2, 3))
        assert realizing_list(DiscreteDistribution.point(1), 3).items == (1, 1, 1)
        with pytest.raises(NotRealizable, match="multiple of 3"):
            realizing_list(D(["1/4", "3/4"], ["1/3", "2/3"]), 4)

    @given(distributions(), st.integers(1, 4))
    def test_roundtrip(self, d, j):
        n = minimal_realizing_length(d) * j
        lst = realizing_list(d, n)
        assert len(lst) == n
        assert list(lst) == sorted(lst)
        assert induced_distribution(lst) == d


class TestItemList:
    @given(item_lists())
    def test_total_and_length(self, items):
        lst = ItemList(tuple(items))
        assert lst.total == sum(items, F(0))
        assert len(lst) == len(items)
        assert (lst + lst).total == 2 * lst.total == lst.repeat(2).total

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            ItemList.of(F(3, 2))


class TestSampling:
    def test_degenerate(self):
        assert sample_iid(DiscreteDistribution.point(F(1, 2)), 5, RandomSeed(1)).items == (F(1, 2),) * 5
        assert len(sample_iid(DiscreteDistribution.point(F(1, 2)), 0, RandomSeed(1))) == 0

    def test_reproducible(self, third):
        a = sample_iid(third, 50, RandomSeed(11, 2))
        assert a == sample_iid(third, 50, RandomSeed(11, 2))
        assert a != sample_iid(third, 50, RandomSeed(11, 3))

    def test_frequency(self, third):
        items = sample_iid(third, 10**6, RandomSeed())
        freq = sum(1 for x in items if x == F(1, 3)) / len(items)
        assert abs(freq - 0.5) <= 0.002


class TestFamilies:
    def test_fmk(self):
        assert family_fmk(1, 3) == DiscreteDistribution.uniform([F(1, 3), F(2, 3)])
        assert family_fmk(2, 3).sizes == (F(1, 9), F(1, 3), F(2, 3), F(8, 9))
        with pytest.raises(ValidationError):
            family_fmk(2, 2)

    @given(st.integers(1, 5), st.integers(3, 9))
    def test_fmk_mean(self, m, k):
        assert family_fmk(m, k).mean() == F(1, 2)

    def test_pp1(self, third):
        assert family_pp1([F(1, 3), F(2, 3)], (1, 1)) == third
        assert family_pp1([F(1, 4)], PackingConfiguration((4,), "perfect")) == DiscreteDistribution.point(F(1, 4))
        with pytest.raises(NotPerfectConfiguration):
            family_pp1([F(1, 3), F(2, 3)], (2, 1))

    def test_pptwo(self, third):
        d = family_pptwo([(F(9, 10), F(1, 10)), (F(6, 10), F(4, 10))])
        assert d.sizes == (F(1, 10), F(2, 5), F(3, 5), F(9, 10))
        assert family_pptwo([(F(2, 3), F(1, 3))]) == third
        with pytest.raises(ValidationError):
            family_pptwo([(F(3, 5), F(1, 2))])

    def test_uniform_discrete(self):
        assert family_uniform_discrete(1) == DiscreteDistribution.point(1)
        assert family_uniform_discrete(2).sizes == (F(1, 2), F(1))
        assert family_uniform_discrete(4).sizes == (F(1, 4), F(1, 2), F(3, 4), F(1))


class TestConfiguration:
    def test_classify(self):
        s = (F(1, 3), F(2, 3))
        assert PackingConfiguration.classify(s, (1, 1)).kind == "perfect"
        assert PackingConfiguration.classify(s, (0, 2)).kind == "covering"
        with pytest.raises(ValidationError):
            PackingConfiguration.classify(s, (2, 2))  # not minimal
        with pytest.raises(ValidationError):
            PackingConfiguration.classify(s, (1, 0))  # does not cover
