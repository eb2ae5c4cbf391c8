"""
Tests for Linearizable Module
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.equivalence import Q, Z
from src.errors import EmptyFamilyError, ValidationError
from src.instance_generator import generate
from src.linearizable import (
    Cases,
    Coord,
    Lift,
    MaxOver,
    MinOver,
    Piecewise,
    Scale,
    SumOver,
    Zero,
    alpha,
    evaluate,
    representation_vector,
    shrink,
    shrink_Q,
    shrink_Z,
)
from src.numeric import dot
from src.oracle import feasible_solutions
from src.problems import (
    C4uInstance,
    Graph,
    MpscInstance,
    Pvc2Instance,
    RppInstance,
    SseInstance,
    TotalTardinessInstance,
    UflpInstance,
    WTardyInstance,
)

# Vertices u, v, x, y are 0..3; edges uv, ux, uy, vx, vy, xy.
K4_GRAPH = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))
K4_WEIGHTS = (3, 8, 7, 1, 2, 10)


def test_mpsc_example_value_and_representation():
    """Test the tree {uv, vx, vy} has power 9 and representation (2,0,0,1,1,0)."""
    instance = MpscInstance(K4_GRAPH, K4_WEIGHTS)
    expr = instance.goal_expr()
    solution = (0, 3, 4)
    assert evaluate(expr, solution, K4_WEIGHTS) == 9
    assert representation_vector(expr, solution, K4_WEIGHTS) == (2, 0, 0, 1, 1, 0)
    assert alpha(expr) == 8


def test_sse_triangle_value():
    """Test the sparsest-cut goal on a weighted triangle."""
    instance = SseInstance(Graph(3, ((0, 1), (1, 2), (0, 2))), (1, 2, 4))
    expr = instance.goal_expr()
    assert expr.domain is Q
    assert evaluate(expr, (1,), instance.weights) == 3
    assert evaluate(expr, (0,), instance.weights) == 5
    assert representation_vector(expr, (1,), instance.weights) == (1, 1, 0)


def test_zero_weights_give_zero():
    """Test any goal evaluates to 0 on the zero vector."""
    instance = MpscInstance(K4_GRAPH, K4_WEIGHTS)
    assert evaluate(instance.goal_expr(), (0, 3, 4), (0,) * 6) == 0


@pytest.mark.parametrize("n,m", [(1, 1), (2, 3), (3, 2), (4, 4)])
def test_problem_alphas(n, m):
    """Test the alpha certificates of every problem tree."""
    jobs = tuple(range(1, n + 1))
    assert alpha(WTardyInstance(jobs, jobs, jobs).goal_expr()) == n * n
    assert alpha(TotalTardinessInstance(jobs, jobs).goal_expr()) == 2 * n * n
    costs = tuple(tuple(range(n)) for _ in range(m))
    assert alpha(UflpInstance(tuple(range(m)), costs).goal_expr()) == 2 * (2 * n + m)
    utilities = tuple(tuple(range(m)) for _ in range(n))
    assert alpha(C4uInstance(utilities, 1).goal_expr()) == 2 * n


def test_graph_problem_alphas():
    """Test alpha for the graph problems on the example graph."""
    n, m = K4_GRAPH.n, K4_GRAPH.m
    assert alpha(SseInstance(K4_GRAPH, K4_WEIGHTS).goal_expr()) == n * m
    assert alpha(Pvc2Instance(K4_GRAPH, K4_WEIGHTS).goal_expr()) == n
    assert alpha(RppInstance(K4_GRAPH, K4_WEIGHTS, (0,), 2).goal_expr()) == 4 * m


def test_node_alpha_rules():
    """Test the composition rules for single nodes."""
    leaf = Coord(0)
    assert alpha(Zero()) == 0
    assert alpha(SumOver(5, leaf, members=lambda x: x)) == 5
    assert alpha(MaxOver(3, SumOver(2, leaf, members=lambda x: x), members=lambda x: x)) == 4
    assert alpha(Scale(3, 2, leaf)) == 3
    rational = Coord(0, domain=Q)
    assert alpha(SumOver(4, SumOver(3, rational, members=lambda x: x), members=lambda x: x)) == 6 * 4 * 3
    assert alpha(MinOver(2, SumOver(3, rational, members=lambda x: x), members=lambda x: x)) == 18
    assert alpha(Lift(10, leaf)) == 10


def test_scale_coefficient_checks():
    """Test Scale rejects zero and out-of-range coefficients."""
    w = (5,)
    assert evaluate(Scale(2, -2, Coord(0)), None, w) == -10
    with pytest.raises(ValidationError):
        evaluate(Scale(2, 3, Coord(0)), None, w)
    with pytest.raises(ValidationError):
        evaluate(Scale(2, 0, Coord(0)), None, w)
    with pytest.raises(ValidationError):
        evaluate(Scale(2, Fraction(1, 2), Coord(0)), None, w)
    assert evaluate(Scale(2, Fraction(1, 2), Coord(0, domain=Q)), None, w) == Fraction(5, 2)


def test_extremum_ties_pick_first_member():
    """Test max and min select the first member on ties."""
    expr = MaxOver(3, Coord(lambda i: i), members=lambda x: x)
    assert representation_vector(expr, (1, 0, 2), (4, 4, 1)) == (0, 1, 0)
    low = MinOver(3, Coord(lambda i: i), members=lambda x: x)
    assert representation_vector(low, (2, 0, 1), (1, 4, 1)) == (0, 0, 1)


def test_empty_family_raises():
    """Test a max over no members is an error."""
    expr = MaxOver(2, Coord(lambda i: i), members=lambda x: ())
    with pytest.raises(EmptyFamilyError):
        evaluate(expr, None, (1, 2))


def test_piecewise_and_cases():
    """Test guarded and case-split expressions."""
    guard = SumOver(2, Cases((Coord(0), Scale(1, -1, Coord(1))), pick=lambda c: c), members=lambda x: x)
    expr = Piecewise(guard, Zero(), Coord(2))
    # x lists which terms enter the guard: w0 - w1.
    assert evaluate(expr, [(0, None), (1, None)], (3, 5, 7)) == 0
    assert evaluate(expr, [(0, None), (1, None)], (6, 5, 7)) == 7
    assert representation_vector(expr, [(0, None), (1, None)], (6, 5, 7)) == (0, 0, 1)


def test_domain_mixing_and_lift_checks():
    """Test inconsistent domains and downward lifts are rejected."""
    with pytest.raises(ValidationError):
        Cases((Coord(0), Coord(1, domain=Q)), pick=lambda c: c)
    with pytest.raises(ValidationError):
        Piecewise(Coord(0), Zero(domain=Q), Coord(1))
    with pytest.raises(ValidationError):
        Lift(1, SumOver(2, Coord(0), members=lambda x: x))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from(['mpsc', 'c4u', 'total-tardiness', 'uflp']))
def test_representation_vector_contract(seed, problem):
    """Test b.w equals the value and ||b||_1 <= alpha on random instances and solutions."""
    instance = generate(problem, 4, bits=16, seed=seed, alternatives=3)
    expr = instance.goal_expr()
    w = instance.weight_vector()
    a = alpha(expr)
    if problem == 'mpsc':
        x = tuple(range(instance.graph.m))
    elif problem == 'total-tardiness':
        x = (3, 1, 0, 2)
    else:
        x = (0, 2)
    b = representation_vector(expr, x, w)
    assert sum(bi * wi for bi, wi in zip(b, w)) == evaluate(expr, x, w)
    assert sum(abs(bi) for bi in b) <= a
    assert evaluate(expr, x, w) == instance.value(x)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from(['mpsc', 'c4u', 'total-tardiness', 'uflp']))
def test_selections_survive_shrinking(seed, problem):
    """Test b computed at w still gives the value at the shrunk weights for every solution."""
    instance = generate(problem, 3, bits=200, seed=seed, alternatives=2, max_edges=3)
    expr = instance.goal_expr()
    w = instance.weight_vector()
    w_hat, _, _ = shrink(expr, w)
    for x in feasible_solutions(instance):
        b = representation_vector(expr, x, w)
        assert dot(b, w_hat) == evaluate(expr, x, w_hat)


def test_lifting_keeps_values():
    """Test lifting alpha leaves values and representation vectors alone."""
    instance = MpscInstance(K4_GRAPH, K4_WEIGHTS)
    expr = instance.goal_expr()
    lifted = Lift(3 * alpha(expr), expr)
    assert alpha(lifted) == 24
    for x in ((0, 3, 4), (0, 1, 2), tuple(range(6))):
        assert evaluate(lifted, x, K4_WEIGHTS) == evaluate(expr, x, K4_WEIGHTS)
        assert representation_vector(lifted, x, K4_WEIGHTS) == representation_vector(expr, x, K4_WEIGHTS)


def test_shrink_integer_tree():
    """Test shrink_Z reduces at N = 2 * alpha and keeps comparisons."""
    instance = MpscInstance(K4_GRAPH, tuple(w * 10 ** 30 for w in K4_WEIGHTS))
    expr = instance.goal_expr()
    weights, threshold, report = shrink_Z(expr, instance.weight_vector())
    assert threshold is None
    assert report.N == 16 and report.alpha == 8
    assert evaluate(expr, (0, 3, 4), weights) < evaluate(expr, (0, 1, 2), weights)


def test_shrink_with_threshold():
    """Test a threshold is reduced together with the weights."""
    instance = MpscInstance(K4_GRAPH, K4_WEIGHTS)
    expr = instance.goal_expr()
    weights, threshold, _ = shrink(expr, K4_WEIGHTS, 9)
    assert evaluate(expr, (0, 3, 4), weights) <= threshold
    assert evaluate(expr, (0, 3, 5), weights) > threshold


def test_shrink_domain_checks():
    """Test the Z and Q entry points refuse the other domain."""
    sse = SseInstance(Graph(3, ((0, 1), (1, 2), (0, 2))), (1, 2, 4))
    with pytest.raises(ValidationError):
        shrink_Z(sse.goal_expr(), sse.weights)
    with pytest.raises(ValidationError):
        shrink_Q(Coord(0), (1,))
    result = shrink(sse.goal_expr(), sse.weights)
    assert result.report.r == 2 * alpha(sse.goal_expr()) ** 2
    assert result.report.alpha == 9


if __name__ == "__main__":
    pytest.main([__file__])
