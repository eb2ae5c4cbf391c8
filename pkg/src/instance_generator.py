"""
Instance Generator Module

This module creates reproducible pseudo-random instances for every problem tag.
All randomness comes from one random.Random seeded by the caller, so the same
arguments always give the same instance (and the same serialized file).
"""

import logging
import random
from fractions import Fraction

from src.errors import ValidationError
from src.problems import (
    C4uInstance,
    Graph,
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
)

# Setup logging
logger = logging.getLogger(__name__)

# Probability of each extra edge on top of the spanning tree.
EXTRA_EDGE_PROBABILITY = Fraction(2, 5)


def _extra_edge(rng):
    return rng.randrange(EXTRA_EDGE_PROBABILITY.denominator) < EXTRA_EDGE_PROBABILITY.numerator


def _weight(rng, bits, low=0):
    return max(low, rng.getrandbits(bits))


def _weights(rng, count, bits, low=0):
    return tuple(_weight(rng, bits, low) for _ in range(count))


def random_connected_graph(rng, n, max_edges=None):
    """
    Random spanning tree plus extra edges, capped at max_edges.

    Args:
        rng (random.Random): Source of randomness
        n (int): Number of vertices
        max_edges (int): Optional limit on the edge count (at least n - 1)

    Returns:
        Graph: A connected graph on n vertices
    """
    edges = [(rng.randrange(v), v) for v in range(1, n)]
    present = {frozenset(e) for e in edges}
    limit = max_edges if max_edges is not None else n * (n - 1) // 2
    for u in range(n):
        for v in range(u + 1, n):
            if len(edges) >= limit:
                break
            if frozenset((u, v)) not in present and _extra_edge(rng):
                edges.append((u, v))
                present.add(frozenset((u, v)))
    return Graph(n, tuple(edges))


def random_graph(rng, n):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if _extra_edge(rng)]
    return Graph(n, tuple(edges))


def _manhattan(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _uflp(rng, facilities, clients, bits, metric):
    if metric:
        span = 1 << bits
        sites = [(rng.randrange(span), rng.randrange(span)) for _ in range(facilities)]
        homes = [(rng.randrange(span), rng.randrange(span)) for _ in range(clients)]
        costs = tuple(tuple(_manhattan(s, h) for h in homes) for s in sites)
    else:
        costs = tuple(_weights(rng, clients, bits) for _ in range(facilities))
    return UflpInstance(_weights(rng, facilities, bits), costs, metric)


def _jobs(rng, n, bits):
    processing = _weights(rng, n, bits, low=1)
    horizon = sum(processing)
    due = tuple(rng.randrange(horizon + 1) for _ in range(n))
    return processing, due


def generate(problem, size, bits=64, seed=0, alternatives=None, metric=False,
             vehicles=2, committee=2, required=None, max_edges=None):
    """
    Generate a random instance.

    Args:
        problem (str): Problem tag
        size (int): Vertices, items, jobs, facilities or voters, by problem
        bits (int): Bit length of the random weights
        seed (int): Seed for random.Random
        alternatives (int): Clients (uflp) or alternatives (c4u); defaults to size
        metric (bool): Draw uflp costs as Manhattan distances of random points
        vehicles (int): Vehicles for rpp
        committee (int): Committee size for c4u
        required (int): Required edges for rpp (default min(3, m))
        max_edges (int): Edge limit for generated graphs

    Returns:
        Instance: The generated instance

    Raises:
        ValidationError: For unknown tags or infeasible size combinations
    """
    if size < 1:
        raise ValidationError(f"Instance size must be at least 1, got {size}")
    if bits < 1:
        raise ValidationError(f"Bit length must be at least 1, got {bits}")
    rng = random.Random(seed)
    others = alternatives if alternatives is not None else size

    if problem == 'wis':
        graph = random_graph(rng, size)
        instance = WisInstance(graph, _weights(rng, size, bits))
    elif problem == 'knapsack':
        weights = _weights(rng, size, bits, low=1)
        values = _weights(rng, size, bits, low=1)
        instance = KnapsackInstance(weights, values, sum(weights) // 2, sum(values) // 2)
    elif problem in ('mpsc', 'sse', 'pvc', 'pvc2'):
        if size < 2:
            raise ValidationError(f"{problem} needs at least 2 vertices")
        graph = random_connected_graph(rng, size, max_edges)
        cls = {'mpsc': MpscInstance, 'sse': SseInstance, 'pvc': PvcInstance, 'pvc2': Pvc2Instance}[problem]
        instance = cls(graph, _weights(rng, graph.m, bits))
    elif problem == 'uflp':
        instance = _uflp(rng, size, others, bits, metric)
    elif problem == 'wtardy':
        processing, due = _jobs(rng, size, bits)
        instance = WTardyInstance(processing, due, _weights(rng, size, bits))
    elif problem == 'total-tardiness':
        processing, due = _jobs(rng, size, bits)
        instance = TotalTardinessInstance(processing, due)
    elif problem == 'rpp':
        if size < 2:
            raise ValidationError("rpp needs at least 2 vertices")
        graph = random_connected_graph(rng, size, max_edges)
        count = min(3, graph.m) if required is None else required
        if not 0 <= count <= graph.m:
            raise ValidationError(f"Cannot require {count} of {graph.m} edges")
        chosen = tuple(sorted(rng.sample(range(graph.m), count)))
        instance = RppInstance(graph, _weights(rng, graph.m, bits, low=1), chosen, vehicles)
    elif problem == 'c4u':
        utilities = tuple(_weights(rng, others, bits) for _ in range(size))
        instance = C4uInstance(utilities, committee)
    else:
        raise ValidationError(f"Unknown problem tag {problem!r}")

    logger.info(f"Generated {problem} instance (size={size}, bits={bits}, seed={seed})")
    return instance
