import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from verigrag.errors import DomainError
from verigrag.harness import pass_at_k


def enumeration_oracle(n: int, c: int, k: int) -> float:
    """Exhaustive subset enumeration: fraction of k-subsets with a pass."""
    total = 0
    hits = 0
    passing = set(range(c))
    for subset in itertools.combinations(range(n), k):
        total += 1
        if passing.intersection(subset):
            hits += 1
    return hits / total


def test_all_samples_pass():
    assert pass_at_k(20, 20, 1) == 1.0


def test_no_samples_pass():
    assert pass_at_k(20, 0, 5) == 0.0


def test_spot_value_five_two_two():
    assert pass_at_k(5, 2, 2) == pytest.approx(0.7, abs=1e-12)
    assert enumeration_oracle(5, 2, 2) == pytest.approx(0.7, abs=1e-12)


def test_matches_enumeration_on_full_small_grid():
    for n in range(1, 11):
        for c in range(0, n + 1):
            for k in range(1, n + 1):
                assert pass_at_k(n, c, k) == pytest.approx(
                    enumeration_oracle(n, c, k), abs=1e-9), (n, c, k)


def test_monotone_in_c_and_k():
    for n in range(1, 11):
        for k in range(1, n + 1):
            values = [pass_at_k(n, c, k) for c in range(0, n + 1)]
            assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
        for c in range(0, n + 1):
            values = [pass_at_k(n, c, k) for k in range(1, n + 1)]
            assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("n,c,k", [
    (5, 6, 1), (5, -1, 1), (5, 2, 0), (5, 2, 6), (0, 0, 1),
])
def test_domain_errors(n, c, k):
    with pytest.raises(DomainError):
        pass_at_k(n, c, k)


def test_non_integer_rejected():
    with pytest.raises(DomainError):
        pass_at_k(5.0, 2, 2)


def test_no_overflow_at_large_n():
    value = pass_at_k(10_000, 17, 100)
    exact = 1.0 - math.prod((10_000 - 17 - i) / (10_000 - i)
                            for i in range(100))
    assert value == pytest.approx(exact, rel=1e-12)
    assert 0.0 <= value <= 1.0


@given(st.integers(min_value=1, max_value=60).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(min_value=0, max_value=n),
                        st.integers(min_value=1, max_value=n))))
@settings(max_examples=200, deadline=None)
def test_range_and_complement_identity(nck):
    n, c, k = nck
    value = pass_at_k(n, c, k)
    assert 0.0 <= value <= 1.0
    if n <= 12:
        assert value == pytest.approx(enumeration_oracle(n, c, k), abs=1e-9)
