from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dnfcover.core import DiscreteDistribution

settings.register_profile(
    "default",
    deadline=None,
    max_examples=150,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

DENOMS = (2, 3, 4, 5, 6, 8, 10, 12)


@st.composite
def unit_rationals(draw, allow_zero=True):
    d = draw(st.sampled_from(DENOMS))
    lo = 0 if allow_zero else 1
    return Fraction(draw(st.integers(lo, d)), d)


@st.composite
def item_lists(draw, max_size=10, allow_zero=True):
    return draw(st.lists(unit_rationals(allow_zero), max_size=max_size))


@st.composite
def distributions(draw, max_sizes=4):
    sizes = draw(st.lists(unit_rationals(False), min_size=1, max_size=max_sizes, unique=True))
    weights = draw(st.lists(st.integers(1, 6), min_size=len(sizes), max_size=len(sizes)))
    total = sum(weights)
    return DiscreteDistribution(tuple(sizes), tuple(Fraction(w, total) for w in weights))


@pytest.fixture
def third():
    return DiscreteDistribution.uniform([Fraction(1, 3), Fraction(2, 3)])


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance battery's one-line verdicts after the run."""
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
