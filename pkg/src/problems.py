"""
Problems Module

This module holds the weighted problem encodings, builds each problem's goal
function as a linearizable expression tree, and kernelizes instances by
shrinking their weights while keeping every solution comparison. It also
implements the routing shortcut rule for the min-max rural postman problem
and the reformulation of power vertex cover with edge-valued powers.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, ClassVar, NamedTuple, Optional

import networkx as nx
from networkx.utils import UnionFind

from src.equivalence import Q, bipartite_index_map, is_metric
from src.errors import InfeasibleSolutionError, InstanceFormatError, KernelsmithError, ValidationError
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
    shrink,
)
from src.numeric import format_rational, parse_rational, to_rational, to_rationals
from src.weight_reduction import threshold_with_report

# Setup logging
logger = logging.getLogger(__name__)

# Power vertex cover (edge-valued form): the vertex receives no edge.
EMPTY = -1


def _rationals(name, values, nonnegative=False):
    try:
        values = to_rationals(values)
    except KernelsmithError as e:
        raise ValidationError(f"{name}: {e}")
    if nonnegative and any(x < 0 for x in values):
        raise ValidationError(f"{name} must be nonnegative")
    return values


def _optional_rational(value):
    return None if value is None else to_rational(value)


def _format_list(values):
    return [format_rational(x) for x in values]


def _parse_list(values):
    if not isinstance(values, list):
        raise InstanceFormatError(f"Expected a list of rationals, got {type(values).__name__}")
    return [parse_rational(v) if isinstance(v, str) else to_rational(v) for v in values]


def _parse_optional(value):
    if value is None:
        return None
    return parse_rational(value) if isinstance(value, str) else to_rational(value)


@dataclass(frozen=True)
class Graph:
    """
    A simple undirected graph on vertices 0..n-1.

    Attributes:
        n (int): Number of vertices
        edges (tuple): Edges as (u, v) pairs; the position is the edge index
    """
    n: int
    edges: tuple

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen = set()
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"Edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise ValidationError(f"Self-loop at vertex {u}")
            key = frozenset((u, v))
            if key in seen:
                raise ValidationError(f"Duplicate edge ({u}, {v})")
            seen.add(key)
        object.__setattr__(self, 'edges', edges)

    @property
    def m(self):
        return len(self.edges)

    def incident(self, v):
        """Indices of edges touching v."""
        return tuple(i for i, edge in enumerate(self.edges) if v in edge)

    def edge_index(self):
        """Map from frozenset endpoint pairs to edge indices."""
        return {frozenset(edge): i for i, edge in enumerate(self.edges)}

    def to_networkx(self, lengths=None):
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        for i, (u, v) in enumerate(self.edges):
            graph.add_edge(u, v, index=i, weight=lengths[i] if lengths is not None else 1)
        return graph

    def spans_connected(self, edge_subset):
        """True iff the edges connect all n vertices (checked by union-find)."""
        if self.n <= 1:
            return True
        components = UnionFind(range(self.n))
        for i in edge_subset:
            components.union(*self.edges[i])
        return len({components[v] for v in range(self.n)}) == 1

    def to_data(self, weights=None):
        if weights is None:
            return {'n': self.n, 'edges': [[u, v] for u, v in self.edges]}
        return {'n': self.n, 'edges': [[u, v, format_rational(w)] for (u, v), w in zip(self.edges, weights)]}

    @classmethod
    def from_data(cls, data, weighted=True):
        """Parse {"n", "edges"}; returns (graph, edge weights or None)."""
        edges, weights = [], []
        for entry in data['edges']:
            edges.append((entry[0], entry[1]))
            if weighted:
                if len(entry) < 3:
                    raise InstanceFormatError(f"Edge {entry!r} is missing its weight")
                weights.append(_parse_optional(entry[2]))
        return cls(int(data['n']), tuple(edges)), (tuple(weights) if weighted else None)


class Instance:
    """Shared behaviour of all problem instances."""

    tag: ClassVar[str]
    sense: ClassVar[str]

    def weight_vector(self):
        raise NotImplementedError

    def with_weights(self, vector):
        raise NotImplementedError

    def structure(self):
        """Everything except the weights; kernels must keep it unchanged."""
        raise NotImplementedError

    def goal_expr(self):
        raise NotImplementedError

    def check_solution(self, solution):
        """Return the canonical form of a feasible solution or raise."""
        raise NotImplementedError

    def value(self, solution):
        raise NotImplementedError

    def to_data(self):
        raise NotImplementedError


def _subset(solution, size, what):
    chosen = tuple(sorted(int(x) for x in solution))
    if len(set(chosen)) != len(chosen):
        raise InfeasibleSolutionError(f"distinct {what}", f"repeated entries in {chosen}")
    if any(not 0 <= x < size for x in chosen):
        raise InfeasibleSolutionError(f"{what} in range", f"{chosen} outside 0..{size - 1}")
    return chosen


def _permutation(solution, n):
    order = tuple(int(x) for x in solution)
    if sorted(order) != list(range(n)):
        raise InfeasibleSolutionError("permutation of all jobs", f"got {order}")
    return order


@dataclass(frozen=True)
class WisInstance(Instance):
    """Maximum weight independent set."""
    graph: Graph
    weights: tuple

    tag: ClassVar[str] = 'wis'
    sense: ClassVar[str] = 'max'

    def __post_init__(self):
        object.__setattr__(self, 'weights', _rationals('vertex weights', self.weights, nonnegative=True))
        if len(self.weights) != self.graph.n:
            raise ValidationError(f"Expected {self.graph.n} vertex weights, got {len(self.weights)}")

    def weight_vector(self):
        return self.weights

    def with_weights(self, vector):
        return replace(self, weights=tuple(vector))

    def structure(self):
        return (self.graph,)

    def goal_expr(self):
        return SumOver(self.graph.n, Coord(lambda v: v), members=lambda chosen: chosen)

    def check_solution(self, solution):
        chosen = _subset(solution, self.graph.n, 'vertices')
        members = set(chosen)
        for u, v in self.graph.edges:
            if u in members and v in members:
                raise InfeasibleSolutionError('independence', f"edge ({u}, {v}) inside the set")
        return chosen

    def value(self, solution):
        return sum((self.weights[v] for v in self.check_solution(solution)), Fraction(0))

    def to_data(self):
        data = self.graph.to_data()
        data['weights'] = _format_list(self.weights)
        return data

    @classmethod
    def from_data(cls, data):
        graph, _ = Graph.from_data(data, weighted=False)
        return cls(graph, tuple(_parse_list(data['weights'])))


@dataclass(frozen=True)
class KnapsackInstance(Instance):
    """
    Knapsack decision: is there a subset of weight <= capacity and value >= target?
    """
    weights: tuple
    values: tuple
    capacity: Fraction
    target: Fraction

    tag: ClassVar[str] = 'knapsack'
    sense: ClassVar[str] = 'max'

    def __post_init__(self):
        object.__setattr__(self, 'weights', _rationals('item weights', self.weights))
        object.__setattr__(self, 'values', _rationals('item values', self.values))
        object.__setattr__(self, 'capacity', to_rational(self.capacity))
        object.__setattr__(self, 'target', to_rational(self.target))
        if len(self.weights) != len(self.values):
            raise ValidationError("Knapsack needs as many values as weights")
        if not self.weights:
            raise ValidationError("Knapsack needs at least one item")

    @property
    def n(self):
        return len(self.weights)

    def weight_vector(self):
        return self.values

    def with_weights(self, vector):
        return replace(self, values=tuple(vector))

    def structure(self):
        return (self.n,)

    def goal_expr(self):
        return SumOver(self.n, Coord(lambda i: i), members=lambda chosen: chosen)

    def fits(self, chosen):
        return sum((self.weights[i] for i in chosen), Fraction(0)) <= self.capacity

    def reaches_target(self, chosen):
        return sum((self.values[i] for i in chosen), Fraction(0)) >= self.target

    def check_solution(self, solution):
        chosen = _subset(solution, self.n, 'items')
        if not self.fits(chosen):
            raise InfeasibleSolutionError('capacity', f"weight exceeds {self.capacity}")
        return chosen

    def value(self, solution):
        return sum((self.values[i] for i in self.check_solution(solution)), Fraction(0))

    def to_data(self):
        return {
            'weights': _format_list(self.weights),
            'values': _format_list(self.values),
            'capacity': format_rational(self.capacity),
            'target': format_rational(self.target),
        }

    @classmethod
    def from_data(cls, data):
        return cls(
            tuple(_parse_list(data['weights'])),
            tuple(_parse_list(data['values'])),
            _parse_optional(data['capacity']),
            _parse_optional(data['target']),
        )


class _EdgeWeighted(Instance):
    """Graph with one weight per edge."""

    def weight_vector(self):
        return self.weights

    def with_weights(self, vector):
        return replace(self, weights=tuple(vector))

    def structure(self):
        return (self.graph,)

    def _check_weights(self, nonnegative=True):
        object.__setattr__(self, 'weights', _rationals('edge weights', self.weights, nonnegative))
        if len(self.weights) != self.graph.m:
            raise ValidationError(f"Expected {self.graph.m} edge weights, got {len(self.weights)}")

    def to_data(self):
        return self.graph.to_data(self.weights)

    @classmethod
    def from_data(cls, data):
        graph, weights = Graph.from_data(data)
        return cls(graph, weights)


@dataclass(frozen=True)
class MpscInstance(_EdgeWeighted):
    """Min-power symmetric connectivity: connected spanning subgraph of least total power."""
    graph: Graph
    weights: tuple

    tag: ClassVar[str] = 'mpsc'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        self._check_weights()
        if self.graph.m == 0:
            raise ValidationError("Min-power connectivity needs at least one edge")
        if not self.graph.spans_connected(range(self.graph.m)):
            raise ValidationError("Min-power connectivity needs a connected graph")

    def goal_expr(self):
        incidence = [self.graph.incident(v) for v in range(self.graph.n)]
        degree = max(len(edges) for edges in incidence)
        power = MaxOver(
            degree,
            Coord(lambda e: e),
            members=lambda item: [e for e in incidence[item[0]] if e in item[1]],
        )
        return SumOver(
            self.graph.n,
            power,
            members=lambda chosen: [(v, frozenset(chosen)) for v in range(self.graph.n)],
        )

    def check_solution(self, solution):
        chosen = _subset(solution, self.graph.m, 'edges')
        if not self.graph.spans_connected(chosen):
            raise InfeasibleSolutionError('connected spanning subgraph')
        return chosen

    def value(self, solution):
        chosen = set(self.check_solution(solution))
        total = Fraction(0)
        for v in range(self.graph.n):
            total += max(self.weights[e] for e in self.graph.incident(v) if e in chosen)
        return total


@dataclass(frozen=True)
class SseInstance(_EdgeWeighted):
    """Sparsest edge cut: minimize cut weight divided by |S| over 1 <= |S| <= n/2."""
    graph: Graph
    weights: tuple

    tag: ClassVar[str] = 'sse'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        self._check_weights()
        if self.graph.n < 2:
            raise ValidationError("Sparsest cut needs at least two vertices")

    def cut(self, side):
        side = set(side)
        return [i for i, (u, v) in enumerate(self.graph.edges) if (u in side) != (v in side)]

    def goal_expr(self):
        n, m = self.graph.n, self.graph.m
        cut_weight = SumOver(m, Coord(lambda e: e, domain=Q), members=self.cut)
        return Scale(n, lambda side: Fraction(1, len(side)), cut_weight)

    def check_solution(self, solution):
        side = _subset(solution, self.graph.n, 'vertices')
        if not 1 <= len(side) <= self.graph.n // 2:
            raise InfeasibleSolutionError('1 <= |S| <= n/2', f"|S| = {len(side)}")
        return side

    def value(self, solution):
        side = self.check_solution(solution)
        return sum((self.weights[e] for e in self.cut(side)), Fraction(0)) / len(side)


@dataclass(frozen=True)
class UflpInstance(Instance):
    """
    Uncapacitated facility location.

    Attributes:
        opening (tuple): Opening cost f(i) for each of the m facilities
        costs (tuple): Service cost matrix, costs[i][j] for facility i and client j
        metric (bool): Whether the costs are promised to be metric
    """
    opening: tuple
    costs: tuple
    metric: bool = False

    tag: ClassVar[str] = 'uflp'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        object.__setattr__(self, 'opening', _rationals('opening costs', self.opening, nonnegative=True))
        object.__setattr__(self, 'costs', tuple(_rationals('service costs', row, nonnegative=True) for row in self.costs))
        if not self.opening:
            raise ValidationError("Facility location needs at least one facility")
        if len(self.costs) != len(self.opening):
            raise ValidationError("Cost matrix needs one row per facility")
        if len({len(row) for row in self.costs}) != 1 or not self.costs[0]:
            raise ValidationError("Cost matrix rows must have one entry per client (at least one client)")
        if self.metric and not is_metric(self.weight_vector(), self.metric_index_map()):
            raise ValidationError("Costs are flagged metric but violate a path inequality")

    @property
    def m(self):
        return len(self.opening)

    @property
    def n(self):
        return len(self.costs[0])

    def metric_index_map(self):
        return bipartite_index_map(self.m, self.n, offset=self.m)

    def weight_vector(self):
        return self.opening + tuple(c for row in self.costs for c in row)

    def with_weights(self, vector):
        vector = tuple(vector)
        m, n = self.m, self.n
        rows = tuple(vector[m + i * n: m + (i + 1) * n] for i in range(m))
        return replace(self, opening=vector[:m], costs=rows)

    def structure(self):
        return (self.m, self.n, self.metric)

    def goal_expr(self):
        m, n = self.m, self.n
        opening = SumOver(m, Coord(lambda i: i), members=lambda open_set: open_set)
        nearest = MinOver(
            m,
            Coord(lambda pair: m + pair[0] * n + pair[1]),
            members=lambda item: [(i, item[0]) for i in item[1]],
        )
        service = SumOver(n, nearest, members=lambda open_set: [(j, open_set) for j in range(n)])
        parts = Cases((Lift(2 * n + m, opening), Lift(2 * n + m, service)), pick=lambda part: part)
        return SumOver(2, parts, members=lambda open_set: [(0, open_set), (1, open_set)])

    def check_solution(self, solution):
        open_set = _subset(solution, self.m, 'facilities')
        if not open_set:
            raise InfeasibleSolutionError('at least one open facility')
        return open_set

    def value(self, solution):
        open_set = self.check_solution(solution)
        total = sum((self.opening[i] for i in open_set), Fraction(0))
        for j in range(self.n):
            total += min(self.costs[i][j] for i in open_set)
        return total

    def to_data(self):
        return {
            'opening': _format_list(self.opening),
            'costs': [_format_list(row) for row in self.costs],
            'metric': self.metric,
        }

    @classmethod
    def from_data(cls, data):
        return cls(
            tuple(_parse_list(data['opening'])),
            tuple(tuple(_parse_list(row)) for row in data['costs']),
            bool(data.get('metric', False)),
        )


def _slack_expr(n, processing_offset, due_offset):
    """Completion time of a job minus its due date, on the item (order, job)."""
    terms = Cases(
        (Coord(lambda i: processing_offset + i), Scale(1, -1, Coord(lambda j: due_offset + j))),
        pick=lambda term: term,
    )

    def members(item):
        order, job = item
        position = order.index(job)
        return [(0, i) for i in order[:position + 1]] + [(1, job)]

    return SumOver(n, terms, members=members)


def _completion_times(order, processing):
    times, elapsed = {}, Fraction(0)
    for job in order:
        elapsed += processing[job]
        times[job] = elapsed
    return times


class _Scheduling(Instance):
    """Single-machine jobs processed in the order of a permutation."""

    sense: ClassVar[str] = 'min'

    @property
    def n(self):
        return len(self.processing)

    def _check_jobs(self, *arrays):
        for name in arrays:
            object.__setattr__(self, name, _rationals(name, getattr(self, name), nonnegative=True))
        if len({len(getattr(self, name)) for name in arrays}) != 1 or not self.processing:
            raise ValidationError(f"Job arrays {arrays} must be nonempty and of equal length")
        object.__setattr__(self, 'threshold', _optional_rational(self.threshold))

    def structure(self):
        return (self.n,)

    def check_solution(self, solution):
        return _permutation(solution, self.n)


@dataclass(frozen=True)
class WTardyInstance(_Scheduling):
    """Weighted number of tardy jobs on one machine."""
    processing: tuple
    due: tuple
    weights: tuple
    threshold: Optional[Fraction] = None

    tag: ClassVar[str] = 'wtardy'

    def __post_init__(self):
        self._check_jobs('processing', 'due', 'weights')

    def weight_vector(self):
        return self.weights + self.processing + self.due

    def with_weights(self, vector):
        vector, n = tuple(vector), self.n
        return replace(self, weights=vector[:n], processing=vector[n:2 * n], due=vector[2 * n:])

    def goal_expr(self):
        n = self.n
        late = Piecewise(_slack_expr(n, n, 2 * n), Zero(), Coord(lambda item: item[1]))
        return SumOver(n, late, members=lambda order: [(order, j) for j in range(n)])

    def value(self, solution):
        order = self.check_solution(solution)
        completion = _completion_times(order, self.processing)
        return sum((self.weights[j] for j in range(self.n) if completion[j] > self.due[j]), Fraction(0))

    def to_data(self):
        data = {
            'processing': _format_list(self.processing),
            'due': _format_list(self.due),
            'weights': _format_list(self.weights),
        }
        if self.threshold is not None:
            data['threshold'] = format_rational(self.threshold)
        return data

    @classmethod
    def from_data(cls, data):
        return cls(
            tuple(_parse_list(data['processing'])),
            tuple(_parse_list(data['due'])),
            tuple(_parse_list(data['weights'])),
            _parse_optional(data.get('threshold')),
        )


@dataclass(frozen=True)
class TotalTardinessInstance(_Scheduling):
    """Total tardiness on one machine."""
    processing: tuple
    due: tuple
    threshold: Optional[Fraction] = None

    tag: ClassVar[str] = 'total-tardiness'

    def __post_init__(self):
        self._check_jobs('processing', 'due')

    def weight_vector(self):
        return self.processing + self.due

    def with_weights(self, vector):
        vector, n = tuple(vector), self.n
        return replace(self, processing=vector[:n], due=vector[n:])

    def goal_expr(self):
        n = self.n
        tardiness = MaxOver(
            2,
            Cases((Zero(), _slack_expr(n, 0, n)), pick=lambda case: case),
            members=lambda item: [(0, item), (1, item)],
        )
        return SumOver(n, tardiness, members=lambda order: [(order, j) for j in range(n)])

    def value(self, solution):
        order = self.check_solution(solution)
        completion = _completion_times(order, self.processing)
        return sum((max(Fraction(0), completion[j] - self.due[j]) for j in range(self.n)), Fraction(0))

    def to_data(self):
        data = {'processing': _format_list(self.processing), 'due': _format_list(self.due)}
        if self.threshold is not None:
            data['threshold'] = format_rational(self.threshold)
        return data

    @classmethod
    def from_data(cls, data):
        return cls(
            tuple(_parse_list(data['processing'])),
            tuple(_parse_list(data['due'])),
            _parse_optional(data.get('threshold')),
        )


def canonical_walk(multiplicities):
    """Drop pairs of traversals so every edge is used at most twice (parity kept)."""
    return tuple(c if c <= 2 else 2 - c % 2 for c in multiplicities)


def is_closed_walk(graph, multiplicities):
    """True iff the multiset of edges is empty or forms one connected even-degree walk."""
    used = [i for i, c in enumerate(multiplicities) if c]
    if not used:
        return True
    degree = [0] * graph.n
    components = UnionFind()
    for i in used:
        u, v = graph.edges[i]
        degree[u] += multiplicities[i]
        degree[v] += multiplicities[i]
        components.union(u, v)
    if any(d % 2 for d in degree):
        return False
    return len({components[graph.edges[i][0]] for i in used}) == 1


@dataclass(frozen=True)
class RppInstance(_EdgeWeighted):
    """
    Min-max k-rural postman: k closed walks covering the required edges,
    minimizing the longest walk.
    """
    graph: Graph
    weights: tuple
    required: tuple
    vehicles: int

    tag: ClassVar[str] = 'rpp'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        self._check_weights()
        required = tuple(sorted({int(e) for e in self.required}))
        if any(not 0 <= e < self.graph.m for e in required):
            raise ValidationError("Required edges must be edges of the graph")
        if self.vehicles < 1:
            raise ValidationError("Need at least one vehicle")
        object.__setattr__(self, 'required', required)

    @property
    def lengths(self):
        return self.weights

    def structure(self):
        return (self.graph, self.required, self.vehicles)

    def goal_expr(self):
        m = self.graph.m
        walk_length = SumOver(
            2 * m,
            Coord(lambda e: e),
            members=lambda walk: [e for e, count in enumerate(walk) for _ in range(count)],
        )
        return MaxOver(self.vehicles, walk_length, members=lambda walks: walks)

    def check_solution(self, solution):
        walks = []
        solution = tuple(solution)
        if len(solution) != self.vehicles:
            raise InfeasibleSolutionError('one walk per vehicle', f"got {len(solution)} walks")
        for walk in solution:
            walk = tuple(int(c) for c in walk)
            if len(walk) != self.graph.m or any(c < 0 for c in walk):
                raise InfeasibleSolutionError('walk multiplicity vector', f"{walk}")
            walk = canonical_walk(walk)
            if not is_closed_walk(self.graph, walk):
                raise InfeasibleSolutionError('closed walk', f"{walk} is not connected with even degrees")
            walks.append(walk)
        covered = {e for walk in walks for e, c in enumerate(walk) if c}
        missing = [e for e in self.required if e not in covered]
        if missing:
            raise InfeasibleSolutionError('required edges covered', f"missing {missing}")
        return tuple(sorted(walks))

    def walk_length(self, walk):
        return sum((c * self.weights[e] for e, c in enumerate(walk)), Fraction(0))

    def value(self, solution):
        return max(self.walk_length(walk) for walk in self.check_solution(solution))

    def to_data(self):
        data = self.graph.to_data(self.weights)
        data['required'] = list(self.required)
        data['vehicles'] = self.vehicles
        return data

    @classmethod
    def from_data(cls, data):
        graph, weights = Graph.from_data(data)
        return cls(graph, weights, tuple(data['required']), int(data['vehicles']))


@dataclass(frozen=True)
class PvcInstance(_EdgeWeighted):
    """Power vertex cover: powers mu(v) >= 0 with max(mu(u), mu(v)) >= w(e) on every edge."""
    graph: Graph
    weights: tuple

    tag: ClassVar[str] = 'pvc'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        self._check_weights()

    def goal_expr(self):
        return pvc_to_pvc2(self).goal_expr()

    def check_solution(self, solution):
        powers = tuple(to_rational(x) for x in solution)
        if len(powers) != self.graph.n or any(x < 0 for x in powers):
            raise InfeasibleSolutionError('nonnegative power per vertex')
        for i, (u, v) in enumerate(self.graph.edges):
            if max(powers[u], powers[v]) < self.weights[i]:
                raise InfeasibleSolutionError('edge covered', f"edge ({u}, {v})")
        return powers

    def value(self, solution):
        return sum(self.check_solution(solution), Fraction(0))


@dataclass(frozen=True)
class Pvc2Instance(_EdgeWeighted):
    """Power vertex cover where each vertex takes the weight of one edge, or nothing."""
    graph: Graph
    weights: tuple

    tag: ClassVar[str] = 'pvc2'
    sense: ClassVar[str] = 'min'

    def __post_init__(self):
        self._check_weights()

    def power(self, choice):
        return Fraction(0) if choice == EMPTY else self.weights[choice]

    def goal_expr(self):
        choice = Cases(
            (Zero(), Coord(lambda e: e)),
            pick=lambda e: (0, None) if e == EMPTY else (1, e),
        )
        return SumOver(self.graph.n, choice, members=lambda assignment: assignment)

    def check_solution(self, solution):
        assignment = tuple(int(x) for x in solution)
        if len(assignment) != self.graph.n:
            raise InfeasibleSolutionError('one choice per vertex', f"got {len(assignment)}")
        if any(not (x == EMPTY or 0 <= x < self.graph.m) for x in assignment):
            raise InfeasibleSolutionError('choice is an edge or empty')
        for i, (u, v) in enumerate(self.graph.edges):
            if max(self.power(assignment[u]), self.power(assignment[v])) < self.weights[i]:
                raise InfeasibleSolutionError('edge covered', f"edge ({u}, {v})")
        return assignment

    def value(self, solution):
        return sum((self.power(x) for x in self.check_solution(solution)), Fraction(0))


@dataclass(frozen=True)
class C4uInstance(Instance):
    """
    Chamberlin-Courant committee with utilities: choose at most k alternatives
    maximizing the sum over voters of their best alternative's utility.
    """
    utilities: tuple
    committee: int
    threshold: Optional[Fraction] = None

    tag: ClassVar[str] = 'c4u'
    sense: ClassVar[str] = 'max'

    def __post_init__(self):
        rows = tuple(_rationals('utilities', row, nonnegative=True) for row in self.utilities)
        if not rows or len({len(row) for row in rows}) != 1 or not rows[0]:
            raise ValidationError("Utilities must be a nonempty voters x alternatives matrix")
        if self.committee < 1:
            raise ValidationError("Committee size must be at least 1")
        object.__setattr__(self, 'utilities', rows)
        object.__setattr__(self, 'threshold', _optional_rational(self.threshold))

    @property
    def n(self):
        return len(self.utilities)

    @property
    def m(self):
        return len(self.utilities[0])

    def weight_vector(self):
        return tuple(u for row in self.utilities for u in row)

    def with_weights(self, vector):
        vector, m = tuple(vector), self.m
        return replace(self, utilities=tuple(vector[v * m:(v + 1) * m] for v in range(self.n)))

    def structure(self):
        return (self.n, self.m, self.committee)

    def goal_expr(self):
        m = self.m
        best = MaxOver(
            self.committee,
            Coord(lambda pair: pair[0] * m + pair[1]),
            members=lambda item: [(item[0], a) for a in item[1]],
        )
        return SumOver(self.n, best, members=lambda chosen: [(v, chosen) for v in range(self.n)])

    def check_solution(self, solution):
        chosen = _subset(solution, self.m, 'alternatives')
        if not 1 <= len(chosen) <= self.committee:
            raise InfeasibleSolutionError('1 <= |committee| <= k', f"size {len(chosen)}")
        return chosen

    def value(self, solution):
        chosen = self.check_solution(solution)
        return sum((max(row[a] for a in chosen) for row in self.utilities), Fraction(0))

    def to_data(self):
        data = {'utilities': [_format_list(row) for row in self.utilities], 'committee': self.committee}
        if self.threshold is not None:
            data['threshold'] = format_rational(self.threshold)
        return data

    @classmethod
    def from_data(cls, data):
        return cls(
            tuple(tuple(_parse_list(row)) for row in data['utilities']),
            int(data['committee']),
            _parse_optional(data.get('threshold')),
        )


PROBLEM_TYPES = {
    cls.tag: cls
    for cls in (
        WisInstance, KnapsackInstance, MpscInstance, SseInstance, UflpInstance,
        WTardyInstance, TotalTardinessInstance, RppInstance, PvcInstance, Pvc2Instance, C4uInstance,
    )
}


def instance_to_dict(instance):
    """Serialize an instance as {"problem": tag, "data": {...}}."""
    return {'problem': instance.tag, 'data': instance.to_data()}


def instance_from_dict(document):
    """
    Parse {"problem": tag, "data": {...}} into an instance.

    Raises:
        InstanceFormatError: For unknown tags or missing/ill-typed fields
        ValidationError: If the parsed instance breaks an invariant
    """
    if not isinstance(document, dict) or 'problem' not in document or 'data' not in document:
        raise InstanceFormatError('Instance document needs "problem" and "data" keys')
    tag = document['problem']
    if tag not in PROBLEM_TYPES:
        raise InstanceFormatError(f"Unknown problem tag {tag!r}")
    try:
        return PROBLEM_TYPES[tag].from_data(document['data'])
    except (KeyError, TypeError, IndexError, AttributeError) as e:
        raise InstanceFormatError(f"Malformed {tag} data: {e!r}")


@dataclass(frozen=True)
class GoalModel:
    """
    A problem's goal expression with the weight vector and reduction parameters.

    Attributes:
        expr (LinExpr): Goal expression
        weights (tuple): Weight vector the expression reads
        sense (str): "min" or "max"
        alpha (int): Linearizability constant of expr
        N (int): Integer reduction radius (None for rational trees)
        r (int): Rational relation radius (None for integer trees)
    """
    expr: Any
    weights: tuple
    sense: str
    alpha: int
    N: Optional[int] = None
    r: Optional[int] = None

    @property
    def d(self):
        return len(self.weights)


def build_goal_expr(instance):
    """
    Goal expression, weight vector and reduction parameters of an instance.

    Knapsack uses the value side with N = n + 1; every other problem uses
    N = 2 * alpha (integer trees) or r = 2 * alpha^2 (rational trees).
    """
    expr = instance.goal_expr()
    if isinstance(instance, PvcInstance):
        instance = pvc_to_pvc2(instance)
    a = expr.alpha
    if isinstance(instance, KnapsackInstance):
        return GoalModel(expr, instance.values, instance.sense, a, N=instance.n + 1)
    if expr.domain is Q:
        return GoalModel(expr, instance.weight_vector(), instance.sense, a, r=2 * a * a)
    return GoalModel(expr, instance.weight_vector(), instance.sense, a, N=max(1, 2 * a))


def meets_threshold(sense, value, threshold):
    """Decision for a threshold: value <= k when minimizing, value >= k when maximizing."""
    return value <= threshold if sense == 'min' else value >= threshold


def solution_value(instance, solution):
    """
    Exact goal value of a feasible solution.

    Raises:
        InfeasibleSolutionError: Naming the violated constraint
    """
    return instance.value(solution)


def validate(instance):
    """
    Re-run an instance's invariant checks (construction already ran them once).

    Raises:
        ValidationError: Naming the broken invariant
    """
    if not isinstance(instance, Instance):
        raise ValidationError(f"Not a problem instance: {type(instance).__name__}")
    return type(instance).from_data(instance.to_data())


def with_weights(instance, vector):
    """Rebuild an instance with a new weight vector, checking its length."""
    vector = tuple(vector)
    expected = len(instance.weight_vector())
    if len(vector) != expected:
        raise ValidationError(f"Expected {expected} weights for {instance.tag}, got {len(vector)}")
    return instance.with_weights(vector)


def shortest_walk_cost(instance, source, target):
    """Shortest-path length between two vertices of a routing instance."""
    lengths = nx.single_source_dijkstra_path_length(
        instance.graph.to_networkx(instance.weights), source, weight='weight'
    )
    if target not in lengths:
        raise ValidationError(f"Vertex {target} is not reachable from {source}")
    return Fraction(lengths[target])


class KernelResult(NamedTuple):
    instance: Any
    threshold: Optional[int]
    report: Any


def _kernelize_knapsack(instance, settings):
    N = instance.n + 1
    (weights, capacity), weight_report = threshold_with_report(instance.weights, instance.capacity, N, settings)
    (values, target), value_report = threshold_with_report(instance.values, instance.target, N, settings)
    both_exhaustive = weight_report.verification_level == value_report.verification_level == 'exhaustive'
    report = replace(
        value_report,
        alpha=instance.n,
        max_abs_in_bits=max(weight_report.max_abs_in_bits, value_report.max_abs_in_bits),
        max_abs_out_bits=max(weight_report.max_abs_out_bits, value_report.max_abs_out_bits),
        elapsed=weight_report.elapsed + value_report.elapsed,
        verification_level='exhaustive' if both_exhaustive else 'signs',
        rounds=max(weight_report.rounds, value_report.rounds),
    )
    reduced = KnapsackInstance(weights, values, capacity, target)
    return KernelResult(reduced, None, report)


def kernelize(instance, threshold=None, settings=None):
    """
    Shrink an instance's weights, keeping its structure and all comparisons.

    Args:
        instance (Instance): A valid problem instance
        threshold (Fraction): Optional decision threshold (instances with a
            threshold field use it when this is None)
        settings (Settings): Caps for the reduction post-checks

    Returns:
        KernelResult: (reduced instance, reduced threshold or None, ReductionReport)
    """
    try:
        if isinstance(instance, KnapsackInstance):
            result = _kernelize_knapsack(instance, settings)
        elif isinstance(instance, PvcInstance):
            reduced, k_hat, report = kernelize(pvc_to_pvc2(instance), threshold, settings)
            result = KernelResult(PvcInstance(instance.graph, reduced.weights), k_hat, report)
        else:
            if threshold is None:
                threshold = getattr(instance, 'threshold', None)
            model = build_goal_expr(instance)
            weights, k_hat, report = shrink(model.expr, model.weights, threshold, settings)
            reduced = instance.with_weights(weights)
            if hasattr(reduced, 'threshold'):
                reduced = replace(reduced, threshold=k_hat)
            result = KernelResult(reduced, k_hat, report)
    except Exception as e:
        logger.error(f"Kernelization of {instance.tag} instance failed: {e}")
        raise
    logger.info(f"Kernelized {instance.tag} instance: {result.report.max_abs_in_bits} -> "
                f"{result.report.max_abs_out_bits} bits")
    return result


def pvc_to_pvc2(instance):
    """Same graph and weights, with powers restricted to edge weights or zero."""
    return Pvc2Instance(instance.graph, instance.weights)


def pvc2_to_pvc_assignment(instance, assignment):
    """Turn an edge-valued assignment into the power values it stands for."""
    return tuple(instance.power(choice) for choice in instance.check_solution(assignment))


class RppShortcut:
    """
    Routing instance restricted to at most 3|R| vertices, with solution maps.

    Attributes:
        original (RppInstance): Input instance
        instance (RppInstance): Reduced instance on a complete graph
        vertices (tuple): Original vertex id of each reduced vertex
    """

    def __init__(self, original, instance, vertices, distances):
        self.original = original
        self.instance = instance
        self.vertices = vertices
        self._distances = distances
        self._original_graph = original.graph.to_networkx(original.weights)
        self._reduced_graph = instance.graph.to_networkx(instance.weights)
        self._original_index = original.graph.edge_index()
        self._reduced_index = instance.graph.edge_index()
        self._required_image = {
            j: self._original_index[frozenset((vertices[a], vertices[b]))]
            for j in instance.required
            for a, b in [instance.graph.edges[j]]
        }

    def distance(self, u, v):
        """Shortest-path length between two original vertices."""
        return self._distances[u][v]

    @staticmethod
    def _circuit(graph, walk):
        """Euler circuit of a walk as a list of (tail, head, edge index)."""
        multigraph = nx.MultiGraph()
        for e, count in enumerate(walk):
            u, v = graph.edges[e]
            for _ in range(count):
                multigraph.add_edge(u, v, index=e)
        return [(u, v, multigraph.edges[u, v, key]['index'])
                for u, v, key in nx.eulerian_circuit(multigraph, keys=True)]

    @staticmethod
    def _path_edges(graph_nx, index, source, target):
        path = nx.dijkstra_path(graph_nx, source, target, weight='weight')
        return [index[frozenset(pair)] for pair in zip(path, path[1:])]

    def to_reduced(self, solution):
        """Map a solution of the original instance to one of no greater cost."""
        solution = self.original.check_solution(solution)
        position = {v: i for i, v in enumerate(self.vertices)}
        required = set(self.original.required)
        reverse = {original: j for j, original in self._required_image.items()}
        walks = []
        for walk in solution:
            counts = [0] * self.instance.graph.m
            visits = [(position[u], position[v], reverse[e])
                      for u, v, e in (self._circuit(self.original.graph, walk) if any(walk) else [])
                      if e in required]
            for step, (tail, head, edge) in enumerate(visits):
                counts[edge] += 1
                next_tail = visits[(step + 1) % len(visits)][0]
                if head != next_tail:
                    for e in self._path_edges(self._reduced_graph, self._reduced_index, head, next_tail):
                        counts[e] += 1
            walks.append(canonical_walk(counts))
        return self.instance.check_solution(walks)

    def to_original(self, solution):
        """Map a solution of the reduced instance to one of no greater cost."""
        solution = self.instance.check_solution(solution)
        walks = []
        for walk in solution:
            counts = [0] * self.original.graph.m
            if any(walk):
                for u, v, e in self._circuit(self.instance.graph, walk):
                    if e in self._required_image:
                        counts[self._required_image[e]] += 1
                    else:
                        for f in self._path_edges(self._original_graph, self._original_index,
                                                  self.vertices[u], self.vertices[v]):
                            counts[f] += 1
            walks.append(canonical_walk(counts))
        return self.original.check_solution(walks)


def rpp_shortcut(instance):
    """
    Restrict a routing instance to the endpoints of required edges plus at most
    one shortest-path vertex per required edge, on a complete graph whose
    non-required edges carry shortest-path lengths.

    Raises:
        ValidationError: If required edges lie in different components
    """
    graph = instance.graph
    if not instance.required:
        empty = RppInstance(Graph(0, ()), (), (), instance.vehicles)
        return RppShortcut(instance, empty, (), {})

    graph_nx = graph.to_networkx(instance.weights)
    endpoints = []
    for e in instance.required:
        for v in graph.edges[e]:
            if v not in endpoints:
                endpoints.append(v)
    component = nx.node_connected_component(graph_nx, endpoints[0])
    if any(v not in component for v in endpoints):
        raise ValidationError("Required edges must lie in one connected component")

    distances, paths = {}, {}
    for v in endpoints:
        distances[v], paths[v] = nx.single_source_dijkstra(graph_nx, v, weight='weight')

    vertices = list(endpoints)
    endpoint_set = set(endpoints)
    for e in instance.required:
        u, v = graph.edges[e]
        if distances[u][v] < instance.weights[e]:
            outside = [x for x in paths[u][v][1:-1] if x not in endpoint_set]
            if outside and outside[0] not in vertices:
                vertices.append(outside[0])
    for v in vertices[len(endpoints):]:
        distances[v], _ = nx.single_source_dijkstra(graph_nx, v, weight='weight')

    required_pairs = {frozenset(graph.edges[e]): e for e in instance.required}
    edges, lengths, required = [], [], []
    for i, a in enumerate(vertices):
        for j in range(i + 1, len(vertices)):
            b = vertices[j]
            pair = frozenset((a, b))
            if pair in required_pairs:
                required.append(len(edges))
                lengths.append(instance.weights[required_pairs[pair]])
            else:
                lengths.append(distances[a][b])
            edges.append((i, j))
    reduced = RppInstance(Graph(len(vertices), tuple(edges)), tuple(lengths), tuple(required), instance.vehicles)
    logger.info(f"Routing shortcut: {graph.n} -> {len(vertices)} vertices for {len(instance.required)} required edges")
    return RppShortcut(instance, reduced, tuple(vertices), distances)
