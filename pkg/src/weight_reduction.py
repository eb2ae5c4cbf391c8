"""
Weight Reduction Module

This module replaces a rational weight vector by a small integer vector that
keeps the sign of every integer linear test with l1-norm at most N.

The construction peels the vector apart in rounds: normalize by the largest
magnitude, approximate simultaneously with accuracy 1/(N+1), keep the integer
numerators and recurse on the exact residual. Every round zeroes at least one
more coordinate, so there are at most d rounds. The rounds are combined with
powers of a base larger than N times every round entry, which keeps the
lexicographic order of the round signs.

When the input scaled to coprime integers is already shorter than the peeled
vector, the scaled input is returned instead; a positive multiple of w keeps
every sign.
"""

import logging
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import factorial, gcd

from src.config import resolve
from src.equivalence import ClassSpec, Q, Z, check_sign_order, same_class, within_cap
from src.errors import InfeasibleEnumerationError, ParameterError, ReductionError
from src.lattice import simultaneous_approx
from src.numeric import linf, max_bits, rat_div, scale_to_integers, to_rational, to_rationals, vec_scale, vec_sub

# Setup logging
logger = logging.getLogger(__name__)

# Bounds with more bits than this render as "2^a*(b)^c" instead of decimal.
DECIMAL_RENDER_BITS = 65_536


@dataclass(frozen=True)
class Bound:
    """
    The integer 2^two_power * base^exponent, kept symbolic until needed.
    """
    two_power: int
    base: int
    exponent: int

    @property
    def bits_estimate(self):
        """An upper bound on the bit length of the value."""
        return self.two_power + self.exponent * self.base.bit_length() + 1

    @property
    def value(self):
        cached = self.__dict__.get('_value')
        if cached is None:
            cached = (self.base ** self.exponent) << self.two_power
            object.__setattr__(self, '_value', cached)
        return cached

    def admits(self, x):
        """Exact test of |x| <= value, using bit lengths to skip most work."""
        bits = abs(int(x)).bit_length()
        low = self.two_power + self.exponent * (self.base.bit_length() - 1)
        if bits <= low:
            return True
        if bits - 1 >= self.two_power + self.exponent * self.base.bit_length():
            return False
        return abs(int(x)) <= self.value

    def __str__(self):
        if self.bits_estimate <= DECIMAL_RENDER_BITS:
            return str(self.value)
        return f"2^{self.two_power}*({self.base})^{self.exponent}"


def reduction_bound(d, N):
    """Bound 2^(4d^3) (N+1)^(d(d+2)) on the entries of reduce(w, N)."""
    return Bound(4 * d ** 3, N + 1, d * (d + 2))


def threshold_bound(d, N):
    """Bound for reduce_with_threshold, i.e. the plain bound in dimension d+1."""
    return reduction_bound(d + 1, N)


def rational_bound(d, r):
    """Bound 2^(4d^3) (r^2+1)^(r d(d+2)) for reduce_rational."""
    return Bound(4 * d ** 3, r * r + 1, r * d * (d + 2))


@dataclass
class ReductionReport:
    """
    Before/after summary of one weight reduction.

    Attributes:
        d (int): Dimension of the reduced vector (thresholds included)
        N (int): Norm radius used for the integer reduction
        r (int): Radius of the rational relation, if any
        alpha (int): Linearizability constant, when driven by a goal expression
        bound (Bound): The entry bound that was checked
        max_abs_in_bits (int): Largest input entry size in bits
        max_abs_out_bits (int): Largest output entry size in bits
        elapsed (float): Seconds spent
        verified (bool): Whether every post-check that ran passed
        verification_level (str): "exhaustive" or "signs"
        rounds (int): Number of approximation rounds
    """
    d: int
    N: int
    bound: Bound
    max_abs_in_bits: int
    max_abs_out_bits: int
    elapsed: float = 0.0
    r: int = None
    alpha: int = None
    verified: bool = None
    verification_level: str = None
    rounds: int = 0

    def to_dict(self):
        """Report as a dict with every number rendered as a decimal string."""
        data = asdict(self)
        data['bound'] = str(self.bound)
        for key in ('d', 'N', 'r', 'alpha', 'max_abs_in_bits', 'max_abs_out_bits', 'rounds'):
            if data[key] is not None:
                data[key] = str(data[key])
        data['elapsed'] = f"{self.elapsed:.6f}"
        return data


def _peel(w, N):
    """Run the approximation rounds and combine them into one integer vector."""
    eps = Fraction(1, N + 1)
    current = tuple(w)
    rounds = []
    while any(current):
        scale = linf(current)
        normalized = vec_scale(rat_div(1, scale), current)
        q, p = simultaneous_approx(normalized, eps)
        rounds.append(p)
        current = vec_sub(vec_scale(q, normalized), p)
        logger.debug(f"Round {len(rounds)}: q has {q.bit_length()} bits, "
                     f"{sum(1 for x in current if x)} nonzero residuals")
        if len(rounds) > len(w):
            raise ReductionError("Approximation rounds did not terminate")

    if not rounds:
        return tuple(0 for _ in w), 0
    largest = max(max(abs(x) for x in p) for p in rounds)
    base = N * largest + 1
    combined = [0] * len(w)
    for p in rounds:
        combined = [base * c + x for c, x in zip(combined, p)]
    return tuple(combined), len(rounds)


def _primitive(v):
    """Divide an integer vector by the gcd of its entries."""
    g = gcd(*v)
    if g <= 1:
        return v
    return tuple(x // g for x in v)


def _post_check(w, result, N, settings):
    """Mandatory sign/order check, plus the exhaustive class check when it is small."""
    order = check_sign_order(w, result, min(N, 2))
    if not order.ok:
        raise ReductionError(f"Reduced vector breaks entry signs or order: {order}")
    cap = resolve(settings).verify_cap
    spec = ClassSpec(N, Z, len(w))
    if not within_cap(spec, cap):
        return 'signs'
    if not same_class(w, result, spec, cap=cap):
        raise ReductionError(f"Reduced vector left the class of the input (N={N})")
    return 'exhaustive'


def run_reduction(w, N, bound, settings=None, **report_fields):
    """
    Peel w at radius N, check the result against `bound` and post-check it.

    Args:
        w (list): Rational weight vector
        N (int): Norm radius
        bound (Bound): Entry bound the result must satisfy
        settings (Settings): Caps for the post-check
        **report_fields: Extra ReductionReport fields (r, alpha)

    Returns:
        tuple: (reduced vector, ReductionReport)

    Raises:
        ParameterError: For an empty vector or N < 1
        ReductionError: If the bound or a post-check fails
    """
    if N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")
    w = to_rationals(w)
    if not w:
        raise ParameterError("Weight vector must have at least one entry")
    started = time.perf_counter()
    result, rounds = _peel(w, N)
    scaled = _primitive(scale_to_integers(w))
    if max_bits(scaled) < max_bits(result):
        logger.debug(f"Scaled input ({max_bits(scaled)} bits) beats the peeled vector ({max_bits(result)} bits)")
        result, rounds = scaled, 0
    out_of_bound = next((x for x in result if not bound.admits(x)), None)
    if out_of_bound is not None:
        raise ReductionError(f"Reduced entry with {abs(out_of_bound).bit_length()} bits exceeds the bound")
    level = _post_check(w, result, N, settings)
    report = ReductionReport(
        d=len(w),
        N=N,
        bound=bound,
        max_abs_in_bits=max_bits(w),
        max_abs_out_bits=max_bits(result),
        elapsed=time.perf_counter() - started,
        verified=True,
        verification_level=level,
        rounds=rounds,
        **report_fields,
    )
    logger.info(f"Reduced d={report.d} vector with N={N}: {report.max_abs_in_bits} -> "
                f"{report.max_abs_out_bits} bits in {rounds} rounds ({level} check)")
    return result, report


def reduce_with_report(w, N, settings=None):
    """
    Reduce w to an integer vector in its class for radius N, with a report.

    Args:
        w (list): Rational weight vector, d >= 1
        N (int): Norm radius, N >= 1
        settings (Settings): Caps for the post-check

    Returns:
        tuple: (reduced vector as a tuple of ints, ReductionReport)

    Raises:
        ParameterError: For an empty vector or N < 1
    """
    return run_reduction(w, N, reduction_bound(len(w), N), settings)


def reduce(w, N, settings=None):
    """
    Integer vector with entries at most 2^(4d^3)(N+1)^(d(d+2)) and the same sign
    as w on every integer test vector of l1-norm at most N.
    """
    return reduce_with_report(w, N, settings)[0]


def threshold_with_report(w, k, N, settings=None):
    """
    Reduce w together with a threshold k, as one vector w + (k,).

    Returns:
        tuple: ((reduced weights, reduced threshold), ReductionReport)
    """
    if N < 2:
        raise ParameterError(f"Threshold reduction needs N >= 2, got {N}")
    w = to_rationals(w)
    joined, report = run_reduction(w + (to_rational(k),), N, threshold_bound(len(w), N), settings)
    return (joined[:-1], joined[-1]), report


def reduce_with_threshold(w, k, N, settings=None):
    """
    Reduce (w, k) so that w.b <= k iff w_hat.b <= k_hat for every integer b
    with l1-norm at most N - 1.
    """
    return threshold_with_report(w, k, N, settings)[0]


def rational_with_report(w, r, settings=None):
    """
    Reduce w for the rational relation of radius r, with a report.

    Runs the integer reduction at N = r! * r; any rational test vector with
    entries p/q (p, q <= r) and l1-norm <= r becomes an integer vector of
    l1-norm <= r! * r after multiplying by r!.
    """
    if r < 1:
        raise ParameterError(f"r must be a positive integer, got {r}")
    N = factorial(r) * r
    result, report = run_reduction(w, N, rational_bound(len(w), r), settings, r=r)
    if report.verification_level == 'signs':
        report.verification_level = _rational_post_check(w, result, r, settings)
    return result, report


def _rational_post_check(w, result, r, settings):
    cap = resolve(settings).verify_cap
    spec = ClassSpec(r, Q, len(w))
    if not within_cap(spec, cap):
        return 'signs'
    if not same_class(w, result, spec, cap=cap):
        raise ReductionError(f"Reduced vector left the rational class of the input (r={r})")
    return 'exhaustive'


def reduce_rational(w, r, settings=None):
    """Integer vector in the class of w under the rational relation of radius r."""
    return rational_with_report(w, r, settings)[0]


def _vectors_of_norm(d, radius):
    """Integer vectors of max-norm exactly `radius`, in lexicographic order."""
    if radius == 0:
        yield (0,) * d
        return
    current = [0] * d

    def fill(position, hit):
        if position == d:
            if hit:
                yield tuple(current)
            return
        for x in range(-radius, radius + 1):
            current[position] = x
            yield from fill(position + 1, hit or abs(x) == radius)

    yield from fill(0, False)


def reduce_bruteforce(w, N, settings=None, max_radius=None):
    """
    Smallest integer vector (by max-norm, then lexicographically) in the class of w.

    Args:
        w (list): Rational weight vector with d <= 4
        N (int): Norm radius with N <= 6
        max_radius (int): Stop searching beyond this max-norm (default: the reduction bound)

    Returns:
        tuple: The minimal representative as ints

    Raises:
        ParameterError: If d or N is outside the searchable range
        InfeasibleEnumerationError: If the search exceeds the enumeration cap
    """
    w = to_rationals(w)
    d = len(w)
    if not 1 <= d <= 4 or not 1 <= N <= 6:
        raise ParameterError(f"Brute-force reduction supports 1 <= d <= 4 and 1 <= N <= 6, got d={d}, N={N}")
    settings = resolve(settings)
    spec = ClassSpec(N, Z, d)
    bound = reduction_bound(d, N)
    tried = 0
    radius = 0
    while max_radius is None or radius <= max_radius:
        if not bound.admits(radius):
            break
        for candidate in _vectors_of_norm(d, radius):
            tried += 1
            if tried > settings.enumeration_cap:
                raise InfeasibleEnumerationError(tried, settings.enumeration_cap, "candidate vectors")
            if same_class(w, candidate, spec, settings=settings):
                logger.debug(f"Brute force found {candidate} after {tried} candidates")
                return candidate
        radius += 1
    raise InfeasibleEnumerationError(tried, radius, "candidate vectors within the search radius")
