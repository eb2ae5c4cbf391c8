"""
Tests for Lattice Module
"""

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from src.errors import LatticeError, ParameterError
from src.lattice import (
    LatticeBasis,
    gram_schmidt,
    is_lll_reduced,
    lll_reduce,
    sda_bound,
    sda_exponent_bound,
    simultaneous_approx,
    unimodular_transform,
)


def _norm2(row):
    return sum(x * x for x in row)


def test_lll_small_basis():
    """Test a classic 3x3 basis comes out reduced and spans the same lattice."""
    basis = LatticeBasis(((1, 1, 1), (-1, 0, 2), (3, 5, 6)))
    reduced = lll_reduce(basis)
    assert is_lll_reduced(reduced)
    assert unimodular_transform(basis, reduced) is not None
    # First vector within 2^((n-1)/2) of the shortest vector (0, 1, 0).
    assert _norm2(reduced.rows[0]) <= 4


def test_lll_rejects_dependent_rows():
    """Test linearly dependent rows raise LatticeError."""
    with pytest.raises(LatticeError):
        lll_reduce([(1, 2), (2, 4)])
    with pytest.raises(LatticeError):
        lll_reduce([(0, 0), (1, 0)])


@pytest.mark.parametrize("delta", [Fraction(1, 4), 1, Fraction(3, 2)])
def test_lll_delta_range(delta):
    """Test delta outside (1/4, 1) is refused."""
    with pytest.raises(ParameterError):
        lll_reduce([(1, 0), (0, 1)], delta)


def test_gram_schmidt_orthogonal_norms():
    """Test Gram-Schmidt squared norms on a triangular basis."""
    norms, mu = gram_schmidt([(2, 0), (1, 3)])
    assert norms == [4, 9]
    assert mu[1][0] == Fraction(1, 2)


def test_is_lll_reduced_detects_unreduced_basis():
    """Test a basis with a large mu coefficient is reported as not reduced."""
    assert not is_lll_reduced([(1, 0), (5, 1)])
    assert is_lll_reduced([(1, 0), (0, 1)])


def test_unimodular_transform_rejects_sublattice():
    """Test a proper sublattice is not accepted as the same lattice."""
    assert unimodular_transform([(1, 0), (0, 1)], [(2, 0), (0, 1)]) is None
    assert unimodular_transform([(1, 0), (0, 1)], [(1, 1), (0, 1)]) == ((1, 1), (0, 1))


matrices = st.lists(
    st.lists(st.integers(min_value=-50, max_value=50), min_size=3, max_size=3),
    min_size=3,
    max_size=3,
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_lll_property(rows):
    """Test random full-rank bases reduce to LLL-reduced bases of the same lattice."""
    try:
        gram_schmidt(rows)
    except LatticeError:
        assume(False)
    reduced = lll_reduce(rows)
    assert is_lll_reduced(reduced)
    assert unimodular_transform(rows, reduced) is not None


def test_sda_bound_matches_exact_test():
    """Test sda_bound is the largest q passing the exact bound test."""
    assert sda_bound(1, Fraction(1, 2)) == 4
    for d in range(1, 5):
        for eps in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 7)):
            q = sda_bound(d, eps)
            assert sda_exponent_bound(d, eps, q)
            assert not sda_exponent_bound(d, eps, q + 1)


def test_simultaneous_approx_exact_shortcut():
    """Test small denominators are solved exactly."""
    q, p = simultaneous_approx((Fraction(1, 3), Fraction(2, 3)), Fraction(1, 4))
    assert (q, p) == (3, (1, 2))


def test_simultaneous_approx_special_coordinates():
    """Test zeros, units and repeated magnitudes are filled in exactly."""
    w = (0, 1, -1, Fraction(1, 5), Fraction(-1, 5))
    q, p = simultaneous_approx(w, Fraction(1, 3))
    assert p[0] == 0
    assert p[1] == q and p[2] == -q
    assert p[3] == -p[4]
    assert all(abs(q * x - pi) <= Fraction(1, 3) for x, pi in zip(w, p))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(min_value=1, max_value=2 ** 64), min_size=1, max_size=4),
    st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)]),
)
def test_simultaneous_approx_lattice_path(numerators, eps):
    """Test the lattice path meets the accuracy and denominator guarantees."""
    denominator = 2 ** 64 + 13
    w = tuple(Fraction(x, denominator) for x in numerators)
    q, p = simultaneous_approx(w, eps)
    assert 1 <= q <= sda_bound(len(w), eps)
    assert all(abs(q * x - pi) <= eps for x, pi in zip(w, p))


def test_simultaneous_approx_parameter_errors():
    """Test eps and coordinate range checks."""
    with pytest.raises(ParameterError):
        simultaneous_approx((Fraction(1, 2),), 1)
    with pytest.raises(ParameterError):
        simultaneous_approx((Fraction(3, 2),), Fraction(1, 2))


if __name__ == "__main__":
    pytest.main([__file__])
