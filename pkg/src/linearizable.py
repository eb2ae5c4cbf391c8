"""
Linearizable Module

This module builds goal functions as expression trees whose value on a
solution x is a dot product b.w with a representation vector b of bounded
l1-norm. Each node carries its coefficient domain and the constant alpha
certifying that bound, computed bottom-up from the composition rules:

    Coord      alpha = 1
    Zero       alpha = 0
    Scale      alpha = n * child            (coefficients in K_n without 0)
    SumOver    alpha = n * child            over Z
               alpha = child! * n * child   over Q
    MaxOver,   alpha = 2 * child            over Z
    MinOver    alpha = 2 * child^2          over Q
    Piecewise  alpha = max(guard, both branches)
    Cases      alpha = max over the cases
    Lift       alpha = any value >= child

Shrinking a tree's weights reduces them at N = 2 * alpha (integer trees) or
for the rational relation of radius 2 * alpha^2 (rational trees).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Any, Callable, Optional

from src.equivalence import CoefficientDomain, Q, Z
from src.errors import DimensionMismatchError, EmptyFamilyError, ValidationError
from src.numeric import to_rational, to_rationals
from src.weight_reduction import rational_with_report, reduce_with_report

# Setup logging
logger = logging.getLogger(__name__)


class LinExpr:
    """Base class of goal expression nodes."""

    domain: CoefficientDomain

    @cached_property
    def alpha(self):
        return self._alpha()

    def _alpha(self):
        raise NotImplementedError

    def _value(self, x, w):
        raise NotImplementedError

    def _collect(self, x, w, coefficient, acc):
        """Add coefficient * b_{x,w} into acc."""
        raise NotImplementedError


def _common_domain(*children):
    domains = {child.domain for child in children}
    if len(domains) != 1:
        raise ValidationError(f"Children mix coefficient domains: {sorted(d.value for d in domains)}")
    return domains.pop()


def _resolve(value, x):
    return value(x) if callable(value) else value


@dataclass(frozen=True, eq=False)
class Coord(LinExpr):
    """The weight w_i, where i is fixed or computed from the solution."""
    index: Any
    domain: CoefficientDomain = Z

    def _alpha(self):
        return 1

    def _position(self, x, w):
        i = _resolve(self.index, x)
        if not 0 <= i < len(w):
            raise DimensionMismatchError(f"index < {len(w)}", i, "coordinate")
        return i

    def _value(self, x, w):
        return w[self._position(x, w)]

    def _collect(self, x, w, coefficient, acc):
        acc[self._position(x, w)] += coefficient


@dataclass(frozen=True, eq=False)
class Zero(LinExpr):
    domain: CoefficientDomain = Z

    def _alpha(self):
        return 0

    def _value(self, x, w):
        return Fraction(0)

    def _collect(self, x, w, coefficient, acc):
        pass


@dataclass(frozen=True, eq=False)
class Scale(LinExpr):
    """c(x) * child, with c(x) in K_n and nonzero."""
    bound: int
    coefficient: Callable[[Any], Any]
    child: LinExpr

    @property
    def domain(self):
        return self.child.domain

    def _alpha(self):
        return self.bound * self.child.alpha

    def _factor(self, x):
        c = to_rational(_resolve(self.coefficient, x))
        if c == 0:
            raise ValidationError("Scale coefficient is zero; use Zero instead")
        if self.domain is Z:
            ok = c.denominator == 1 and abs(c) <= self.bound
        else:
            ok = abs(c.numerator) <= self.bound and c.denominator <= self.bound
        if not ok:
            raise ValidationError(f"Scale coefficient {c} is outside K_{self.bound} over {self.domain.value}")
        return c

    def _value(self, x, w):
        return self._factor(x) * self.child._value(x, w)

    def _collect(self, x, w, coefficient, acc):
        self.child._collect(x, w, coefficient * self._factor(x), acc)


@dataclass(frozen=True, eq=False)
class SumOver(LinExpr):
    """Sum of child over the sub-solutions members(x), declared for index sets of size n."""
    bound: int
    child: LinExpr
    members: Callable[[Any], Any]

    @property
    def domain(self):
        return self.child.domain

    def _alpha(self):
        a = self.child.alpha
        if self.domain is Q:
            return factorial(a) * self.bound * a
        return self.bound * a

    def _value(self, x, w):
        return sum((self.child._value(y, w) for y in self.members(x)), Fraction(0))

    def _collect(self, x, w, coefficient, acc):
        for y in self.members(x):
            self.child._collect(y, w, coefficient, acc)


@dataclass(frozen=True, eq=False)
class _Extremum(LinExpr):
    bound: int
    child: LinExpr
    members: Callable[[Any], Any]

    @property
    def domain(self):
        return self.child.domain

    def _alpha(self):
        a = self.child.alpha
        return 2 * a * a if self.domain is Q else 2 * a

    def _better(self, candidate, best):
        raise NotImplementedError

    def _select(self, x, w):
        """Member attaining the extremum at w; the first one on ties."""
        chosen, best = None, None
        for y in self.members(x):
            value = self.child._value(y, w)
            if chosen is None or self._better(value, best):
                chosen, best = (y,), value
        if chosen is None:
            raise EmptyFamilyError(f"{type(self).__name__} over an empty family")
        return chosen[0], best

    def _value(self, x, w):
        return self._select(x, w)[1]

    def _collect(self, x, w, coefficient, acc):
        y, _ = self._select(x, w)
        self.child._collect(y, w, coefficient, acc)


class MaxOver(_Extremum):
    def _better(self, candidate, best):
        return candidate > best


class MinOver(_Extremum):
    def _better(self, candidate, best):
        return candidate < best


@dataclass(frozen=True, eq=False)
class Piecewise(LinExpr):
    """when_nonpositive(x) if guard(x) <= 0, else otherwise(x)."""
    guard: LinExpr
    when_nonpositive: LinExpr
    otherwise: LinExpr

    @property
    def domain(self):
        return _common_domain(self.guard, self.when_nonpositive, self.otherwise)

    def __post_init__(self):
        _common_domain(self.guard, self.when_nonpositive, self.otherwise)

    def _alpha(self):
        return max(self.guard.alpha, self.when_nonpositive.alpha, self.otherwise.alpha)

    def _branch(self, x, w):
        return self.when_nonpositive if self.guard._value(x, w) <= 0 else self.otherwise

    def _value(self, x, w):
        return self._branch(x, w)._value(x, w)

    def _collect(self, x, w, coefficient, acc):
        self._branch(x, w)._collect(x, w, coefficient, acc)


@dataclass(frozen=True, eq=False)
class Cases(LinExpr):
    """Dispatch on the solution: pick(x) returns (case index, sub-solution)."""
    children: tuple
    pick: Callable[[Any], Any]

    @property
    def domain(self):
        return _common_domain(*self.children)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        _common_domain(*self.children)

    def _alpha(self):
        return max(child.alpha for child in self.children)

    def _case(self, x):
        index, y = self.pick(x)
        return self.children[index], y

    def _value(self, x, w):
        child, y = self._case(x)
        return child._value(y, w)

    def _collect(self, x, w, coefficient, acc):
        child, y = self._case(x)
        child._collect(y, w, coefficient, acc)


@dataclass(frozen=True, eq=False)
class Lift(LinExpr):
    """The same function, certified with a larger alpha."""
    alpha_value: int
    child: LinExpr

    def __post_init__(self):
        if self.alpha_value < self.child.alpha:
            raise ValidationError(f"Cannot lift alpha {self.child.alpha} down to {self.alpha_value}")

    @property
    def domain(self):
        return self.child.domain

    def _alpha(self):
        return self.alpha_value

    def _value(self, x, w):
        return self.child._value(x, w)

    def _collect(self, x, w, coefficient, acc):
        self.child._collect(x, w, coefficient, acc)


def alpha(expr):
    """The alpha certificate of an expression tree (an int, possibly huge)."""
    return expr.alpha


def evaluate(expr, x, w):
    """
    Value of the goal function at solution x and weights w.

    Raises:
        EmptyFamilyError: If a max or min ranges over no members
    """
    return Fraction(expr._value(x, to_rationals(w)))


def representation_vector(expr, x, w):
    """
    Vector b with b.w = evaluate(expr, x, w) and l1-norm at most alpha.

    Max and min nodes select the first member attaining the extremum at w.
    """
    w = to_rationals(w)
    acc = [Fraction(0)] * len(w)
    expr._collect(x, w, Fraction(1), acc)
    return tuple(acc)


@dataclass
class ShrinkResult:
    """Reduced weights, reduced threshold (or None) and the reduction report."""
    weights: tuple
    threshold: Optional[int]
    report: Any

    def __iter__(self):
        return iter((self.weights, self.threshold, self.report))


def _split(joined, has_threshold):
    if has_threshold:
        return joined[:-1], joined[-1]
    return joined, None


def shrink_Z(expr, w, k=None, settings=None):
    """
    Shrink integer-linearizable weights, reducing w (and k) at N = 2 * alpha.

    Every comparison f(x, w) >= f(y, w) and every threshold test f(x, w) >= k
    keeps its outcome under the reduced weights.

    Args:
        expr (LinExpr): Goal expression over Z
        w (list): Weights
        k (Fraction): Optional threshold

    Returns:
        ShrinkResult: Reduced weights, threshold and report
    """
    if expr.domain is not Z:
        raise ValidationError("shrink_Z needs an expression over the integer domain")
    w = to_rationals(w)
    a = expr.alpha
    N = max(1, 2 * a)
    vector = w + (to_rational(k),) if k is not None else w
    joined, report = reduce_with_report(vector, N, settings)
    report.alpha = a
    weights, threshold = _split(joined, k is not None)
    logger.info(f"Shrunk integer goal weights: alpha={a}, N={N}")
    return ShrinkResult(weights, threshold, report)


def shrink_Q(expr, w, k=None, settings=None):
    """
    Shrink rational-linearizable weights via the rational relation of radius 2 * alpha^2.
    """
    if expr.domain is not Q:
        raise ValidationError("shrink_Q needs an expression over the rational domain")
    w = to_rationals(w)
    a = expr.alpha
    r = max(1, 2 * a * a)
    vector = w + (to_rational(k),) if k is not None else w
    joined, report = rational_with_report(vector, r, settings)
    report.alpha = a
    weights, threshold = _split(joined, k is not None)
    logger.info(f"Shrunk rational goal weights: alpha={a}, r={r}")
    return ShrinkResult(weights, threshold, report)


def shrink(expr, w, k=None, settings=None):
    """Dispatch to shrink_Z or shrink_Q by the expression's domain."""
    if expr.domain is Q:
        return shrink_Q(expr, w, k, settings)
    return shrink_Z(expr, w, k, settings)
