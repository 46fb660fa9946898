import pytest
from hypothesis import given
from hypothesis import strategies as st

from dnfcover.rng import DEFAULT_SEED, MASK64, RandomSeed, Stream, mix64, stream_key


def test_default_seed_is_documented_constant():
    assert DEFAULT_SEED == 0x5EEDB1C0


def test_mix64_known_value():
    # SplitMix64 finalizer of the first counter step from state 0
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF


def test_same_seed_same_stream():
    a = Stream(RandomSeed(7, 3))
    b = Stream(RandomSeed(7, 3))
    assert [a.next64() for _ in range(20)] == [b.next64() for _ in range(20)]


def test_streams_differ():
    a = Stream(RandomSeed(7, 3))
    b = Stream(RandomSeed(7, 4))
    assert [a.next64() for _ in range(5)] != [b.next64() for _ in range(5)]
    assert stream_key(7, 3) != stream_key(8, 3)


@given(st.integers(0, MASK64), st.integers(1, 10**6))
def test_below_in_range(seed, bound):
    s = Stream(RandomSeed(seed))
    for _ in range(10):
        assert 0 <= s.below(bound) < bound


def test_seed_validation():
    with pytest.raises(ValueError):
        RandomSeed(-1)
    with pytest.raises(ValueError):
        RandomSeed(1 << 64)
    assert RandomSeed(5).with_stream(9) == RandomSeed(5, 9)
