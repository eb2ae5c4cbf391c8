"""
Oracle Module

This module provides exhaustive solvers and verifiers for small instances.
They enumerate every feasible solution in canonical form, so a kernel can be
checked by comparing optimal-solution sets and threshold decisions exactly.
"""

import logging
from dataclasses import dataclass
from functools import singledispatch
from itertools import combinations, combinations_with_replacement, permutations, product
from typing import Any, Optional

import networkx as nx

from src.config import resolve
from src.equivalence import same_class
from src.errors import CapExceededError, StructureMismatchError, ValidationError
from src.problems import (
    EMPTY,
    C4uInstance,
    KnapsackInstance,
    MpscInstance,
    PvcInstance,
    Pvc2Instance,
    RppInstance,
    SseInstance,
    TotalTardinessInstance,
    UflpInstance,
    WisInstance,
    WTardyInstance,
    is_closed_walk,
    meets_threshold,
    pvc_to_pvc2,
)

# Setup logging
logger = logging.getLogger(__name__)


def _require(cap_name, limit, actual):
    if actual > limit:
        raise CapExceededError(cap_name, limit, actual)


def _subsets(size, low=0, high=None):
    high = size if high is None else min(high, size)
    for k in range(low, high + 1):
        yield from combinations(range(size), k)


@singledispatch
def feasible_solutions(instance, settings=None):
    """
    Stream every feasible solution of an instance in canonical form.

    Raises:
        CapExceededError: If the instance is too large to enumerate
    """
    raise ValidationError(f"No enumerator for {type(instance).__name__}")


@feasible_solutions.register
def _(instance: WisInstance, settings=None):
    _require('subset_cap', resolve(settings).subset_cap, instance.graph.n)
    for chosen in _subsets(instance.graph.n):
        members = set(chosen)
        if not any(u in members and v in members for u, v in instance.graph.edges):
            yield chosen


@feasible_solutions.register
def _(instance: KnapsackInstance, settings=None):
    _require('subset_cap', resolve(settings).subset_cap, instance.n)
    for chosen in _subsets(instance.n):
        if instance.fits(chosen):
            yield chosen


@feasible_solutions.register
def _(instance: MpscInstance, settings=None):
    graph = instance.graph
    _require('subset_cap', resolve(settings).subset_cap, graph.m)
    for chosen in _subsets(graph.m, low=graph.n - 1):
        if graph.spans_connected(chosen):
            yield chosen


@feasible_solutions.register
def _(instance: SseInstance, settings=None):
    _require('subset_cap', resolve(settings).subset_cap, instance.graph.n)
    yield from _subsets(instance.graph.n, low=1, high=instance.graph.n // 2)


@feasible_solutions.register
def _(instance: UflpInstance, settings=None):
    _require('subset_cap', resolve(settings).subset_cap, instance.m)
    yield from _subsets(instance.m, low=1)


@feasible_solutions.register
def _(instance: C4uInstance, settings=None):
    _require('subset_cap', resolve(settings).subset_cap, instance.m)
    yield from _subsets(instance.m, low=1, high=instance.committee)


def _orders(instance, settings):
    _require('permutation_cap', resolve(settings).permutation_cap, instance.n)
    return permutations(range(instance.n))


@feasible_solutions.register
def _(instance: WTardyInstance, settings=None):
    yield from _orders(instance, settings)


@feasible_solutions.register
def _(instance: TotalTardinessInstance, settings=None):
    yield from _orders(instance, settings)


def closed_walks(graph):
    """All closed walks with edge multiplicities in {0, 1, 2}, the empty walk first."""
    for walk in product(range(3), repeat=graph.m):
        if is_closed_walk(graph, walk):
            yield walk


def _check_routing_caps(instance, settings):
    settings = resolve(settings)
    _require('rpp_required_cap', settings.rpp_required_cap, len(instance.required))
    _require('rpp_vehicle_cap', settings.rpp_vehicle_cap, instance.vehicles)
    _require('rpp_edge_cap', settings.rpp_edge_cap, instance.graph.m)


@feasible_solutions.register
def _(instance: RppInstance, settings=None):
    _check_routing_caps(instance, settings)
    walks = sorted(closed_walks(instance.graph))
    required = set(instance.required)
    for team in combinations_with_replacement(walks, instance.vehicles):
        covered = {e for walk in team for e, count in enumerate(walk) if count}
        if required <= covered:
            yield team


@feasible_solutions.register
def _(instance: Pvc2Instance, settings=None):
    graph = instance.graph
    _require('pvc2_cap', resolve(settings).pvc2_cap, (graph.m + 1) ** graph.n)
    choices = [EMPTY] + list(range(graph.m))
    for assignment in product(choices, repeat=graph.n):
        power = [instance.power(c) for c in assignment]
        if all(max(power[u], power[v]) >= w for (u, v), w in zip(graph.edges, instance.weights)):
            yield assignment


@feasible_solutions.register
def _(instance: PvcInstance, settings=None):
    graph = instance.graph
    levels = sorted(set(instance.weights) | {0})
    _require('pvc2_cap', resolve(settings).pvc2_cap, len(levels) ** graph.n)
    for powers in product(levels, repeat=graph.n):
        if all(max(powers[u], powers[v]) >= w for (u, v), w in zip(graph.edges, instance.weights)):
            yield powers


@dataclass(frozen=True)
class OptimaReport:
    """
    Exact optimum of an instance.

    Attributes:
        value (Fraction): Optimal goal value (None if nothing is feasible)
        solutions (tuple): Every optimal solution, in enumeration order
        count (int): Number of feasible solutions enumerated
    """
    value: Any
    solutions: tuple
    count: int


def brute_force(instance, settings=None):
    """
    Find all optimal solutions by full enumeration.

    Args:
        instance (Instance): An instance within the oracle caps
        settings (Settings): Oracle caps

    Returns:
        OptimaReport: Optimal value, optimal solutions and enumeration count

    Raises:
        CapExceededError: If the instance is above a cap
    """
    best, optima, count = None, [], 0
    better = (lambda a, b: a < b) if instance.sense == 'min' else (lambda a, b: a > b)
    for solution in feasible_solutions(instance, settings):
        count += 1
        value = instance.value(solution)
        if best is None or better(value, best):
            best, optima = value, [solution]
        elif value == best:
            optima.append(solution)
    logger.debug(f"Brute force on {instance.tag}: {count} feasible, optimum {best}")
    return OptimaReport(best, tuple(optima), count)


@dataclass(frozen=True)
class KernelVerdict:
    """
    Outcome of verify_kernel.

    Attributes:
        ok (bool): True iff every check passed
        witness: A solution on which the two instances disagree, if any
        reason (str): What disagreed
    """
    ok: bool
    witness: Optional[Any] = None
    reason: str = ''

    def __bool__(self):
        return self.ok


def _thresholds(original, reduced, thresholds):
    if thresholds is not None:
        return thresholds
    k = getattr(original, 'threshold', None)
    k_hat = getattr(reduced, 'threshold', None)
    if k is None or k_hat is None:
        return None
    return k, k_hat


def _verify_knapsack(original, reduced):
    count = 0
    for chosen in _subsets(original.n):
        count += 1
        if original.fits(chosen) != reduced.fits(chosen):
            return KernelVerdict(False, chosen, 'capacity decision differs'), count
        if original.reaches_target(chosen) != reduced.reaches_target(chosen):
            return KernelVerdict(False, chosen, 'target decision differs'), count
    return KernelVerdict(True), count


def _compare_optima(before, after):
    if set(before.solutions) == set(after.solutions):
        return KernelVerdict(True)
    lost = [s for s in before.solutions if s not in set(after.solutions)]
    gained = [s for s in after.solutions if s not in set(before.solutions)]
    witness = lost[0] if lost else gained[0]
    return KernelVerdict(False, witness, 'optimal solution sets differ')


def verify_kernel(original, reduced, thresholds=None, settings=None):
    """
    Check that a reduced instance has the same optimal solutions as the original,
    and (with thresholds) the same decision on every feasible solution.
    Knapsack kernels are also checked on the capacity and target decision of
    every subset.

    Args:
        original (Instance): Input instance
        reduced (Instance): Kernelized instance
        thresholds (tuple): Optional (k, k_hat); defaults to the instances' own thresholds

    Returns:
        KernelVerdict: ok, plus a witness solution and reason on failure

    Raises:
        StructureMismatchError: If the instances differ in type or structure
        CapExceededError: If the instances are above an oracle cap
    """
    if type(original) is not type(reduced) or original.structure() != reduced.structure():
        raise StructureMismatchError(
            f"Cannot compare {original.tag} with {reduced.tag}: structures differ"
        )
    if isinstance(original, KnapsackInstance):
        _require('subset_cap', resolve(settings).subset_cap, original.n)
        verdict, _ = _verify_knapsack(original, reduced)
        if verdict:
            verdict = _compare_optima(brute_force(original, settings), brute_force(reduced, settings))
        logger.info(f"Kernel verification for knapsack: {'pass' if verdict else 'FAIL'}")
        return verdict
    if isinstance(original, PvcInstance):
        return verify_kernel(pvc_to_pvc2(original), pvc_to_pvc2(reduced), thresholds, settings)

    verdict = _compare_optima(brute_force(original, settings), brute_force(reduced, settings))
    if verdict:
        pair = _thresholds(original, reduced, thresholds)
        if pair is not None:
            k, k_hat = pair
            for solution in feasible_solutions(original, settings):
                left = meets_threshold(original.sense, original.value(solution), k)
                right = meets_threshold(reduced.sense, reduced.value(solution), k_hat)
                if left != right:
                    verdict = KernelVerdict(False, solution, 'threshold decision differs')
                    break
    logger.info(f"Kernel verification for {original.tag}: {'pass' if verdict else 'FAIL'}"
                + (f" ({verdict.reason}, witness {verdict.witness})" if not verdict else ''))
    return verdict


def verify_class(w, w_hat, spec, cap=None, settings=None):
    """
    Exhaustive class-membership verdict for two weight vectors.

    Raises:
        InfeasibleEnumerationError: If the test vectors exceed the cap
    """
    return same_class(w, w_hat, spec, cap=cap, settings=settings)


def _tour_cost(instance, distance, tour):
    """Cost of visiting oriented required edges in order, closing the loop."""
    if not tour:
        return 0
    total = 0
    for position, (tail, head, e) in enumerate(tour):
        total += instance.weights[e]
        next_tail = tour[(position + 1) % len(tour)][0]
        total += distance[head][next_tail]
    return total


def _best_tour(instance, distance, edges):
    best = None
    for order in permutations(edges):
        for flips in product((False, True), repeat=len(order)):
            tour = []
            for e, flip in zip(order, flips):
                u, v = instance.graph.edges[e]
                tour.append((v, u, e) if flip else (u, v, e))
            cost = _tour_cost(instance, distance, tour)
            if best is None or cost < best:
                best = cost
    return best if best is not None else 0


def rpp_min_max_value(instance, max_required=6):
    """
    Optimal min-max walk length by assigning required edges to vehicles and
    trying every visiting order and orientation, joined by shortest paths.

    Args:
        instance (RppInstance): Routing instance
        max_required (int): Largest number of required edges accepted

    Returns:
        Fraction: The optimal value
    """
    _require('rpp_required_cap', max_required, len(instance.required))
    if not instance.required:
        return 0
    graph_nx = instance.graph.to_networkx(instance.weights)
    endpoints = {v for e in instance.required for v in instance.graph.edges[e]}
    if not endpoints <= nx.node_connected_component(graph_nx, min(endpoints)):
        raise ValidationError("Required edges must lie in one connected component")
    distance = dict(nx.all_pairs_dijkstra_path_length(graph_nx, weight='weight'))
    cache = {}
    best = None
    for assignment in product(range(instance.vehicles), repeat=len(instance.required)):
        longest = 0
        for vehicle in range(instance.vehicles):
            edges = tuple(e for e, owner in zip(instance.required, assignment) if owner == vehicle)
            if edges not in cache:
                cache[edges] = _best_tour(instance, distance, edges)
            longest = max(longest, cache[edges])
        if best is None or longest < best:
            best = longest
    return best
