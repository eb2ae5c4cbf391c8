"""
Tests for Equivalence Module
"""

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from src import equivalence
from src.equivalence import (
    ClassSpec,
    Q,
    Z,
    bipartite_index_map,
    check_metric_preserved,
    check_sign_order,
    count_test_vectors,
    is_metric,
    minimum_test_vectors,
    point_pair_index_map,
    same_class,
    separating_vector,
    within_cap,
)
from src.errors import DimensionMismatchError, InfeasibleEnumerationError, ParameterError, ValidationError


def _brute_force_count(r, d):
    """Canonical integer vectors with l1-norm <= r, counted naively."""
    count = 0
    for beta in product(range(-r, r + 1), repeat=d):
        if sum(abs(x) for x in beta) > r or not any(beta):
            continue
        first = next(x for x in beta if x)
        count += first > 0
    return count


@pytest.mark.parametrize("r,d", [(1, 1), (1, 3), (2, 2), (3, 3), (4, 2)])
def test_count_matches_enumeration(r, d):
    """Test the convolution count agrees with the stream and a naive count."""
    spec = ClassSpec(r, Z, d)
    vectors = list(equivalence.test_vectors(spec))
    assert len(vectors) == count_test_vectors(spec) == _brute_force_count(r, d)
    assert len(set(vectors)) == len(vectors)


def test_test_vectors_are_canonical():
    """Test every streamed vector is nonzero, within budget and starts positive."""
    for beta in equivalence.test_vectors(ClassSpec(3, Z, 3)):
        assert any(beta)
        assert sum(abs(x) for x in beta) <= 3
        assert next(x for x in beta if x) > 0


def test_rational_vectors_within_budget():
    """Test rational test vectors use entries p/q with p, q <= r and l1-norm <= r."""
    spec = ClassSpec(2, Q, 2)
    vectors = list(equivalence.test_vectors(spec))
    allowed = {Fraction(p, q) for p in range(1, 3) for q in range(1, 3)}
    assert (Fraction(1, 2), Fraction(-1)) in vectors
    assert (Fraction(1, 2), Fraction(-3, 2)) not in vectors
    for beta in vectors:
        assert sum(abs(x) for x in beta) <= 2
        assert all(x == 0 or abs(x) in allowed for x in beta)
    assert len(vectors) == count_test_vectors(spec)


def test_classspec_validation():
    """Test r and d must be positive."""
    with pytest.raises(ParameterError):
        ClassSpec(0, Z, 2)
    with pytest.raises(ParameterError):
        ClassSpec(2, Z, 0)
    assert ClassSpec(2, 'Q', 1).domain is Q


def test_enumeration_cap():
    """Test exceeding the cap raises instead of sampling."""
    with pytest.raises(InfeasibleEnumerationError):
        list(equivalence.test_vectors(ClassSpec(5, Z, 5), cap=100))
    with pytest.raises(InfeasibleEnumerationError):
        same_class((1, 2), (1, 2), ClassSpec(1000, Z, 2), cap=50)


def test_large_rational_radius_is_countable():
    """Test radius 11 over Q in one dimension counts its 83 magnitudes without a scale limit."""
    spec = ClassSpec(11, Q, 1)
    assert count_test_vectors(spec) == 83
    assert len(list(equivalence.test_vectors(spec))) == 83
    assert same_class((3,), (5,), spec)
    assert not same_class((3,), (-5,), spec)


def test_count_stops_at_limit():
    """Test a limited count returns limit + 1 once the limit is passed."""
    spec = ClassSpec(5, Z, 5)
    exact = count_test_vectors(spec)
    assert count_test_vectors(spec, limit=100) == 101
    assert count_test_vectors(spec, limit=exact) == exact
    assert within_cap(spec, exact)
    assert not within_cap(spec, exact - 1)
    assert minimum_test_vectors(spec) == 25 <= exact
    assert minimum_test_vectors(ClassSpec(4, Q, 2)) <= count_test_vectors(ClassSpec(4, Q, 2))


small_vectors = st.lists(st.integers(min_value=-3, max_value=3), min_size=2, max_size=2)


@settings(max_examples=1000, deadline=None)
@given(small_vectors, small_vectors, small_vectors, st.integers(min_value=1, max_value=3))
def test_class_relation_is_an_equivalence(a, b, c, r):
    """Test reflexivity, symmetry and transitivity on small triples."""
    spec = ClassSpec(r, Z, 2)
    assert same_class(a, a, spec)
    assert same_class(a, b, spec) == same_class(b, a, spec)
    if same_class(a, b, spec) and same_class(b, c, spec):
        assert same_class(a, c, spec)


@settings(max_examples=1000, deadline=None)
@given(small_vectors, small_vectors, st.integers(min_value=1, max_value=4), st.data())
def test_class_relation_is_monotone_in_radius(a, b, r_large, data):
    """Test equivalence at a radius carries over to every smaller radius."""
    r_small = data.draw(st.integers(min_value=1, max_value=r_large))
    if same_class(a, b, ClassSpec(r_large, Z, 2)):
        assert same_class(a, b, ClassSpec(r_small, Z, 2))
    if same_class(a, b, ClassSpec(r_large, Q, 2)):
        assert same_class(a, b, ClassSpec(r_small, Q, 2))


@settings(max_examples=1000, deadline=None)
@given(small_vectors, small_vectors, st.integers(min_value=1, max_value=3))
def test_class_members_share_signs_and_order(a, b, r):
    """Test equivalent vectors agree on entry signs, and on entry order from radius 2."""
    if same_class(a, b, ClassSpec(r, Z, 2)):
        report = check_sign_order(a, b, r)
        assert report.ok
        assert not report.entry_failures


def test_same_class_examples():
    """Test class membership on hand-checked vectors."""
    spec = ClassSpec(2, Z, 3)
    assert same_class((5, 3, 1), (3, 2, 1), spec)
    assert not same_class((5, 3, 1), (3, 2, 2), spec)
    assert same_class((Fraction(12, 5), Fraction(17, 5)), (1, 2), ClassSpec(2, Z, 2))


def test_separating_vector_witness():
    """Test the witness really separates the two vectors."""
    w, w_prime = (5, 3, 1), (3, 2, 2)
    beta = separating_vector(w, w_prime, ClassSpec(2, Z, 3))
    assert beta is not None
    left = sum(b * x for b, x in zip(beta, w))
    right = sum(b * x for b, x in zip(beta, w_prime))
    assert (left > 0) != (right > 0) or (left == 0) != (right == 0)


def test_same_class_dimension_check():
    """Test vectors must match the class dimension."""
    with pytest.raises(DimensionMismatchError):
        same_class((1, 2), (1, 2, 3), ClassSpec(1, Z, 2))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=-1000, max_value=1000), min_size=1, max_size=4),
    st.integers(min_value=1, max_value=50),
)
def test_positive_scaling_stays_in_class(w, c):
    """Test multiplying by a positive constant never changes the class."""
    spec = ClassSpec(3, Z, len(w))
    assert same_class(w, [c * x for x in w], spec)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=-1000, max_value=1000), min_size=1, max_size=4).filter(any))
def test_negation_leaves_class(w):
    """Test a nonzero vector and its negation are never equivalent."""
    assert not same_class(w, [-x for x in w], ClassSpec(1, Z, len(w)))


def test_integer_class_implies_rational_class():
    """Test equivalence at r! * r over Z carries over to radius r over Q."""
    w, w_prime = (100, 1), (101, 1)
    assert same_class(w, w_prime, ClassSpec(4, Z, 2))
    assert same_class(w, w_prime, ClassSpec(2, Q, 2))


def test_check_sign_order_reports_failures():
    """Test entry and pair failures are listed with 0-based indices."""
    report = check_sign_order((3, -1, 2), (3, 1, 4), 2)
    assert report.entry_failures == [1]
    assert report.pair_failures == [(0, 2)]
    assert not report
    assert check_sign_order((3, 1), (4, 2), 1).ok
    with pytest.raises(ParameterError):
        check_sign_order((1,), (1,), 0)


def test_check_sign_order_radius_one_skips_pairs():
    """Test pairwise order is only compared for r >= 2."""
    report = check_sign_order((1, 2), (2, 1), 1)
    assert report.ok


def test_metric_check_triangle():
    """Test a metric and an order-preserving but triangle-breaking reduction."""
    index_map = point_pair_index_map(3)
    assert index_map == {(0, 1): 0, (0, 2): 1, (1, 2): 2}
    w = (3, 4, 5)
    assert is_metric(w, index_map)
    assert check_metric_preserved(w, (2, 3, 4), index_map)
    # 2 + 3 > 4 but 2 + 3 = 5 turns a strict inequality into equality.
    assert not check_metric_preserved(w, (2, 3, 5), index_map)


def test_metric_check_four_point_path():
    """Test the three-step path inequality is covered."""
    index_map = bipartite_index_map(2, 2)
    # Facility f0 to client c1 directly versus f0-c0-f1-c1.
    w = (1, 10, 1, 1)
    assert not is_metric(w, index_map)
    assert is_metric((1, 3, 1, 1), index_map)
    assert not check_metric_preserved((1, 2, 1, 1), (1, 3, 1, 1), index_map)


def test_metric_index_map_validation():
    """Test malformed index maps are rejected."""
    with pytest.raises(ValidationError):
        is_metric((1, 2), {(0, 0): 0})
    with pytest.raises(ValidationError):
        is_metric((1, 2), {(0, 1): 0, (1, 0): 1})
    with pytest.raises(ValidationError):
        is_metric((1, 2), {(0, 1): 5})


if __name__ == "__main__":
    pytest.main([__file__])
