"""
Equivalence Module

This module decides the equivalence relation between weight vectors: two
vectors are r-equivalent over a coefficient domain K when no test vector with
entries in K_r and l1-norm at most r separates their signs. It also provides
the cheaper derived checks (entry signs, pairwise order, metric inequalities).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import permutations
from math import lcm

from src.config import resolve
from src.errors import (
    DimensionMismatchError,
    InfeasibleEnumerationError,
    ParameterError,
    ValidationError,
)
from src.numeric import rat_cmp, scale_to_integers, signum, to_rationals

# Setup logging
logger = logging.getLogger(__name__)


class CoefficientDomain(Enum):
    INTEGER = 'Z'
    RATIONAL = 'Q'


Z = CoefficientDomain.INTEGER
Q = CoefficientDomain.RATIONAL


@dataclass(frozen=True)
class ClassSpec:
    """
    Identifies the relation: radius r, coefficient domain and dimension d.
    """
    r: int
    domain: CoefficientDomain
    d: int

    def __post_init__(self):
        if self.r < 1:
            raise ParameterError(f"ClassSpec needs r >= 1, got {self.r}")
        if self.d < 1:
            raise ParameterError(f"ClassSpec needs d >= 1, got {self.d}")
        if not isinstance(self.domain, CoefficientDomain):
            object.__setattr__(self, 'domain', CoefficientDomain(self.domain))


def _scaled_magnitudes(spec):
    """Positive coefficient magnitudes as ints, with the common scale and budget."""
    if spec.domain is Z:
        return list(range(1, spec.r + 1)), 1, spec.r
    scale = lcm(*range(1, spec.r + 1))
    values = {Fraction(p, q) for p in range(1, spec.r + 1) for q in range(1, spec.r + 1)}
    return sorted(int(v * scale) for v in values), scale, spec.r * scale


def minimum_test_vectors(spec):
    """
    Cheap lower bound on count_test_vectors.

    Every positive magnitude times a unit vector is canonical. Over Z there are
    r magnitudes; over Q the coprime pairs p/q with p, q <= r give at least r*r/4.
    """
    if spec.domain is Z:
        return spec.r * spec.d
    return max(spec.r, spec.r * spec.r // 4) * spec.d


def count_test_vectors(spec, limit=None):
    """
    Count the canonical test vectors of a spec without enumerating them.

    Counts every vector with norm budget r (both signs, zero included) by a
    sparse coordinate-wise convolution over the norm used so far, then halves
    after removing zero. With a limit, counting stops as soon as the count is
    known to exceed it and limit + 1 is returned.
    """
    magnitudes, _, budget = _scaled_magnitudes(spec)
    ceiling = None if limit is None else 2 * limit + 2
    counts = {0: 1}
    total = 1
    for _ in range(spec.d):
        updated = dict(counts)
        for used, ways in counts.items():
            for m in magnitudes:
                if used + m > budget:
                    break
                updated[used + m] = updated.get(used + m, 0) + 2 * ways
                total += 2 * ways
                if ceiling is not None and total > ceiling:
                    return limit + 1
        counts = updated
    return (total - 1) // 2


def within_cap(spec, cap):
    """True when the exhaustive enumeration of spec has at most cap vectors."""
    if minimum_test_vectors(spec) > cap:
        return False
    return count_test_vectors(spec, limit=cap) <= cap


def _check_cap(spec, cap, settings):
    cap = cap if cap is not None else resolve(settings).enumeration_cap
    if minimum_test_vectors(spec) > cap:
        raise InfeasibleEnumerationError(f"at least {minimum_test_vectors(spec)}", cap)
    count = count_test_vectors(spec, limit=cap)
    if count > cap:
        raise InfeasibleEnumerationError(f"more than {cap}", cap)
    return count


def _scaled_vectors(spec):
    """Yield canonical test vectors as integer tuples scaled by the domain scale."""
    magnitudes, _, budget = _scaled_magnitudes(spec)
    d = spec.d
    prefix = [0] * d

    def extend(position, remaining, started):
        if position == d:
            if started:
                yield tuple(prefix)
            return
        prefix[position] = 0
        yield from extend(position + 1, remaining, started)
        for m in magnitudes:
            if m > remaining:
                break
            prefix[position] = m
            yield from extend(position + 1, remaining - m, True)
            if started:
                prefix[position] = -m
                yield from extend(position + 1, remaining - m, True)
        prefix[position] = 0

    yield from extend(0, budget, False)


def test_vectors(spec, cap=None, settings=None):
    """
    Stream the canonical test vectors of a spec.

    Each vector has entries in K_r, l1-norm at most r and a positive first
    nonzero entry; the zero vector is excluded.

    Args:
        spec (ClassSpec): The relation
        cap (int): Override for the enumeration cap

    Returns:
        iterator: Tuples of Fractions

    Raises:
        InfeasibleEnumerationError: If the count exceeds the cap
    """
    _check_cap(spec, cap, settings)
    _, scale, _ = _scaled_magnitudes(spec)
    return (tuple(Fraction(x, scale) for x in beta) for beta in _scaled_vectors(spec))


def _checked_pair(w, w_prime, spec):
    w = to_rationals(w)
    w_prime = to_rationals(w_prime)
    if len(w) != spec.d:
        raise DimensionMismatchError(spec.d, len(w))
    if len(w_prime) != spec.d:
        raise DimensionMismatchError(spec.d, len(w_prime))
    return w, w_prime


def separating_vector(w, w_prime, spec, cap=None, settings=None):
    """
    Find the first canonical test vector whose signs differ on w and w'.

    Returns:
        tuple | None: The separating vector as Fractions, or None
    """
    w, w_prime = _checked_pair(w, w_prime, spec)
    _check_cap(spec, cap, settings)
    a = scale_to_integers(w)
    b = scale_to_integers(w_prime)
    _, scale, _ = _scaled_magnitudes(spec)
    for beta in _scaled_vectors(spec):
        left = sum(x * y for x, y in zip(beta, a) if x)
        right = sum(x * y for x, y in zip(beta, b) if x)
        if signum(left) != signum(right):
            return tuple(Fraction(x, scale) for x in beta)
    return None


def same_class(w, w_prime, spec, cap=None, settings=None):
    """
    Exhaustive class-membership test.

    Args:
        w (list): First weight vector
        w_prime (list): Second weight vector
        spec (ClassSpec): The relation

    Returns:
        bool: True iff every canonical test vector gives equal signs

    Raises:
        DimensionMismatchError: If a vector does not have spec.d entries
        InfeasibleEnumerationError: If the enumeration exceeds the cap
    """
    witness = separating_vector(w, w_prime, spec, cap=cap, settings=settings)
    if witness is not None:
        logger.debug(f"Vectors separated by {witness}")
    return witness is None


@dataclass
class SignOrderReport:
    """Outcome of the entry-sign and pairwise-order checks."""
    entry_failures: list = field(default_factory=list)
    pair_failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.entry_failures and not self.pair_failures

    def __bool__(self):
        return self.ok


def check_sign_order(w, w_prime, r):
    """
    Compare entry signs (r >= 1) and pairwise difference signs (r >= 2).

    Indices in the report are 0-based; pairs are (i, j) with i < j.
    """
    if r < 1:
        raise ParameterError(f"check_sign_order needs r >= 1, got {r}")
    w = to_rationals(w)
    w_prime = to_rationals(w_prime)
    if len(w) != len(w_prime):
        raise DimensionMismatchError(len(w), len(w_prime))
    report = SignOrderReport()
    for i, (a, b) in enumerate(zip(w, w_prime)):
        if signum(a) != signum(b):
            report.entry_failures.append(i)
    if r >= 2:
        for i in range(len(w)):
            for j in range(i + 1, len(w)):
                if rat_cmp(w[i], w[j]) != rat_cmp(w_prime[i], w_prime[j]):
                    report.pair_failures.append((i, j))
    return report


def _normalize_index_map(index_map, d):
    """Turn a pair -> coordinate map into frozenset keys, validating it."""
    normalized = {}
    seen = set()
    for pair, index in index_map.items():
        members = tuple(pair)
        if len(members) != 2 or members[0] == members[1]:
            raise ValidationError(f"Index map key {pair!r} is not a pair of distinct points")
        key = frozenset(members)
        if key in normalized:
            raise ValidationError(f"Point pair {pair!r} appears twice in the index map")
        if not isinstance(index, int) or not 0 <= index < d:
            raise ValidationError(f"Index map sends {pair!r} to invalid coordinate {index!r}")
        if index in seen:
            raise ValidationError(f"Coordinate {index} is used by two point pairs")
        seen.add(index)
        normalized[key] = index
    return normalized


def check_metric_preserved(w, w_prime, index_map):
    """
    Check that every path inequality of a distance vector keeps its sign.

    For distinct points a, x, c the sign of d(a,x) + d(x,c) - d(a,c) must be
    the same under w and w', and likewise for the four-point paths
    d(a,x) + d(x,y) + d(y,c) - d(a,c). Paths using a pair that is not in the
    map are skipped, so bipartite (facility/client) maps work as well.

    Args:
        w (list): Original distances
        w_prime (list): Reduced distances
        index_map (dict): Maps point pairs (a, b) to coordinates of w

    Returns:
        bool: True iff all signs agree

    Raises:
        ValidationError: If the index map is malformed
    """
    w = to_rationals(w)
    w_prime = to_rationals(w_prime)
    if len(w) != len(w_prime):
        raise DimensionMismatchError(len(w), len(w_prime))
    pairs = _normalize_index_map(index_map, len(w))
    points = sorted({p for key in pairs for p in key}, key=repr)

    def lookup(a, b):
        return pairs.get(frozenset((a, b)))

    for a, x, c in permutations(points, 3):
        legs = (lookup(a, x), lookup(x, c), lookup(a, c))
        if None in legs:
            continue
        before = w[legs[0]] + w[legs[1]] - w[legs[2]]
        after = w_prime[legs[0]] + w_prime[legs[1]] - w_prime[legs[2]]
        if signum(before) != signum(after):
            logger.debug(f"Metric sign flip on path {a}-{x}-{c}")
            return False
    for a, x, y, c in permutations(points, 4):
        legs = (lookup(a, x), lookup(x, y), lookup(y, c), lookup(a, c))
        if None in legs:
            continue
        before = w[legs[0]] + w[legs[1]] + w[legs[2]] - w[legs[3]]
        after = w_prime[legs[0]] + w_prime[legs[1]] + w_prime[legs[2]] - w_prime[legs[3]]
        if signum(before) != signum(after):
            logger.debug(f"Metric sign flip on path {a}-{x}-{y}-{c}")
            return False
    return True


def point_pair_index_map(points):
    """Index map for all pairs of `points` in lexicographic pair order."""
    points = list(range(points)) if isinstance(points, int) else list(points)
    index_map = {}
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            index_map[(a, b)] = len(index_map)
    return index_map


def bipartite_index_map(facilities, clients, offset=0):
    """Index map for a row-major facility x client cost matrix starting at `offset`."""
    return {
        (('facility', i), ('client', j)): offset + i * clients + j
        for i in range(facilities)
        for j in range(clients)
    }


def is_metric(w, index_map):
    """True iff no path inequality of the distance vector is violated."""
    w = to_rationals(w)
    pairs = _normalize_index_map(index_map, len(w))
    points = sorted({p for key in pairs for p in key}, key=repr)
    for a, x, c in permutations(points, 3):
        legs = [pairs.get(frozenset(p)) for p in ((a, x), (x, c), (a, c))]
        if None not in legs and w[legs[0]] + w[legs[1]] < w[legs[2]]:
            return False
    for a, x, y, c in permutations(points, 4):
        legs = [pairs.get(frozenset(p)) for p in ((a, x), (x, y), (y, c), (a, c))]
        if None not in legs and w[legs[0]] + w[legs[1]] + w[legs[2]] < w[legs[3]]:
            return False
    return True
