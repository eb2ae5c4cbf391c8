"""
Tests for Weight Reduction Module
"""

import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from src import equivalence
from src.equivalence import ClassSpec, Q, Z, check_sign_order, same_class
from src.errors import ParameterError
from src.weight_reduction import (
    Bound,
    rational_bound,
    rational_with_report,
    reduce,
    reduce_bruteforce,
    reduce_rational,
    reduce_with_report,
    reduce_with_threshold,
    reduction_bound,
    threshold_bound,
)


def test_reduce_keeps_order_example():
    """Test (5, 3, 1) at N=2 reduces to a strictly decreasing positive vector."""
    w_hat = reduce((5, 3, 1), 2)
    assert w_hat[0] > w_hat[1] > w_hat[2] > 0
    assert same_class((5, 3, 1), w_hat, ClassSpec(2, Z, 3))
    assert all(reduction_bound(3, 2).admits(x) for x in w_hat)


def test_reduce_rational_input():
    """Test rational weights reduce to integers with the same order."""
    w_hat = reduce((Fraction(12, 5), Fraction(17, 5)), 2)
    assert all(isinstance(x, int) for x in w_hat)
    assert 0 < w_hat[0] < w_hat[1]


def test_reduce_zero_and_signs():
    """Test zero entries stay zero and signs are kept."""
    assert reduce((0, 0), 3) == (0, 0)
    w_hat = reduce((-7, 0, 2 ** 90), 3)
    assert w_hat[0] < 0 and w_hat[1] == 0 and w_hat[2] > 0


def test_reduce_shrinks_large_weights():
    """Test 256-bit weights come back within the small bound."""
    w = (2 ** 256 - 189, 2 ** 255 + 3 ** 100)
    w_hat, report = reduce_with_report(w, 2)
    assert same_class(w, w_hat, ClassSpec(2, Z, 2))
    assert report.max_abs_in_bits == 256
    assert report.max_abs_out_bits <= reduction_bound(2, 2).bits_estimate < 256
    assert report.verification_level == 'exhaustive'
    assert report.verified


def test_reduce_parameter_errors():
    """Test empty vectors and N < 1 are refused."""
    with pytest.raises(ParameterError):
        reduce((), 2)
    with pytest.raises(ParameterError):
        reduce((1, 2), 0)
    with pytest.raises(ParameterError):
        reduce_with_threshold((1, 2), 3, 1)


weights = st.lists(
    st.integers(min_value=-(2 ** 64), max_value=2 ** 64),
    min_size=1,
    max_size=4,
)


@settings(max_examples=40, deadline=None)
@given(weights, st.integers(min_value=1, max_value=5))
def test_reduce_contract(w, N):
    """Test reduce lands in the class of w within the entry bound."""
    w_hat = reduce(w, N)
    assert same_class(w, w_hat, ClassSpec(N, Z, len(w)))
    bound = reduction_bound(len(w), N)
    assert all(abs(x) <= bound.value for x in w_hat)


@settings(max_examples=30, deadline=None)
@given(weights, st.integers(min_value=-(2 ** 66), max_value=2 ** 66), st.integers(min_value=2, max_value=4))
def test_threshold_contract(w, k, N):
    """Test every threshold test with l1-norm <= N-1 keeps its outcome."""
    w_hat, k_hat = reduce_with_threshold(w, k, N)
    assert all(threshold_bound(len(w), N).admits(x) for x in w_hat + (k_hat,))
    radius = N - 1
    for b in product(range(-radius, radius + 1), repeat=len(w)):
        if sum(abs(x) for x in b) > radius:
            continue
        before = sum(x * y for x, y in zip(b, w)) <= k
        after = sum(x * y for x, y in zip(b, w_hat)) <= k_hat
        assert before == after


@settings(max_examples=15, deadline=None)
@given(
    st.lists(st.fractions(min_value=-1000, max_value=1000, max_denominator=1000), min_size=1, max_size=3),
    st.integers(min_value=1, max_value=2),
)
def test_rational_contract(w, r):
    """Test reduce_rational lands in the rational class of radius r."""
    w_hat = reduce_rational(w, r)
    assert same_class(w, w_hat, ClassSpec(r, Q, len(w)))


def test_reduce_never_lengthens_input():
    """Test a vector already short as integers comes back no longer than it went in."""
    w = (3 * 10 ** 60, 5 * 10 ** 60)
    w_hat, report = reduce_with_report(w, 2)
    assert w_hat == (3, 5)
    assert report.max_abs_out_bits == 3


def test_reduce_wide_vector_bits():
    """Test ten 200-bit entries at N = 11 stay within their input length."""
    rng = random.Random(0)
    w = [rng.getrandbits(200) + 1 for _ in range(10)]
    w_hat, report = reduce_with_report(w, 11)
    assert report.max_abs_out_bits <= report.max_abs_in_bits == max(x.bit_length() for x in w)
    assert check_sign_order(w, w_hat, 2).ok


def _random_vector(rng, d, bits):
    """Mixed-sign entries up to `bits` bits, some zero, some with large denominators."""
    w = []
    for _ in range(d):
        x = 0 if rng.randrange(6) == 0 else rng.choice((-1, 1)) * rng.getrandbits(bits)
        if rng.randrange(3) == 0:
            x = Fraction(x, rng.getrandbits(64) + 1)
        w.append(x)
    return w


@pytest.mark.parametrize("seed", range(500))
def test_reduce_contract_sweep(seed):
    """Test 256-bit vectors with d <= 5 and N <= 8 land in their class within the bound."""
    rng = random.Random(seed)
    d, N = rng.randint(1, 5), rng.randint(1, 8)
    w = _random_vector(rng, d, 256)
    spec = ClassSpec(N, Z, d)
    w_hat, report = reduce_with_report(w, N)
    assert report.verification_level == 'exhaustive'
    assert same_class(w, w_hat, spec)
    assert all(reduction_bound(d, N).admits(x) for x in w_hat)
    if N >= 2:
        assert check_sign_order(w, w_hat, 2).ok
    assert same_class(w, reduce(w_hat, N), spec)


def _threshold_holds(b, w, k):
    return sum(x * y for x, y in zip(b, w)) <= k


@pytest.mark.parametrize("seed", range(200))
def test_threshold_contract_sweep(seed):
    """Test threshold decisions at d <= 5, including thresholds hit exactly by a test vector."""
    rng = random.Random(1000 + seed)
    d, N = rng.randint(1, 5), rng.randint(2, 8)
    w = _random_vector(rng, d, 256)
    spec = ClassSpec(N - 1, Z, d)
    if seed % 2 == 0:
        hit = rng.choice(list(equivalence.test_vectors(spec)))
        k = sum(x * y for x, y in zip(hit, w))
    else:
        k = rng.choice((-1, 1)) * rng.getrandbits(256)
    w_hat, k_hat = reduce_with_threshold(w, k, N)
    assert all(threshold_bound(d, N).admits(x) for x in w_hat + (k_hat,))
    assert _threshold_holds((0,) * d, w, k) == _threshold_holds((0,) * d, w_hat, k_hat)
    for beta in equivalence.test_vectors(spec):
        for b in (beta, tuple(-x for x in beta)):
            assert _threshold_holds(b, w, k) == _threshold_holds(b, w_hat, k_hat)


@pytest.mark.parametrize("seed", range(100))
def test_rational_contract_sweep(seed):
    """Test reduce_rational at d <= 4 and r <= 3 on mixed-sign rationals."""
    rng = random.Random(2000 + seed)
    d, r = rng.randint(1, 4), rng.randint(1, 3)
    w = _random_vector(rng, d, 128)
    w_hat = reduce_rational(w, r)
    assert all(isinstance(x, int) for x in w_hat)
    assert same_class(w, w_hat, ClassSpec(r, Q, d))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(min_value=-(2 ** 128), max_value=2 ** 128), min_size=1, max_size=4),
    st.integers(min_value=2, max_value=6),
)
def test_reduce_is_idempotent_up_to_class(w, N):
    """Test reducing a reduced vector again keeps the class and the entry order."""
    once = reduce(w, N)
    twice = reduce(once, N)
    assert same_class(w, twice, ClassSpec(N, Z, len(w)))
    assert check_sign_order(w, once, 2).ok
    assert check_sign_order(once, twice, 2).ok


def test_rational_report_fields():
    """Test the rational report carries r and the rational bound."""
    w_hat, report = rational_with_report((3, 1, 2), 2)
    assert report.r == 2
    assert report.N == 4
    assert report.bound == rational_bound(3, 2)
    assert report.verification_level == 'exhaustive'
    assert w_hat[0] > w_hat[2] > w_hat[1] > 0


def test_bound_exact_comparison():
    """Test Bound.admits is exact at the boundary."""
    bound = Bound(2, 3, 2)
    assert bound.value == 36
    assert bound.admits(36) and bound.admits(-36)
    assert not bound.admits(37)
    assert str(bound) == '36'


def test_bound_symbolic_rendering():
    """Test huge bounds render symbolically without being materialized."""
    bound = rational_bound(10, 200)
    assert str(bound) == "2^4000*(40001)^24000"
    assert bound.admits(2 ** 1000)
    assert '_value' not in bound.__dict__


def test_report_to_dict_uses_strings():
    """Test the report renders numbers as decimal strings."""
    _, report = reduce_with_report((9, 4), 3)
    data = report.to_dict()
    assert data['d'] == '2'
    assert data['N'] == '3'
    assert data['bound'] == str(reduction_bound(2, 3).value)
    assert data['r'] is None


def test_reduce_bruteforce_minimal():
    """Test the brute-force reducer finds the smallest class representative."""
    assert reduce_bruteforce((5, 3, 1), 2) == (3, 2, 1)
    assert reduce_bruteforce((Fraction(12, 5), Fraction(17, 5)), 2) == (1, 2)
    assert reduce_bruteforce((0, -10), 1) == (0, -1)


def test_reduce_bruteforce_agrees_with_reduce():
    """Test the brute-force result and reduce() share a class."""
    w = (1000, 999, 1)
    spec = ClassSpec(3, Z, 3)
    assert same_class(reduce(w, 3), reduce_bruteforce(w, 3), spec)


def test_reduce_bruteforce_limits():
    """Test the brute-force search refuses large d or N."""
    with pytest.raises(ParameterError):
        reduce_bruteforce((1, 2, 3, 4, 5), 2)
    with pytest.raises(ParameterError):
        reduce_bruteforce((1, 2), 7)


if __name__ == "__main__":
    pytest.main([__file__])
