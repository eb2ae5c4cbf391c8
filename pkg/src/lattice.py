"""
Lattice Module

This module implements exact LLL basis reduction and simultaneous Diophantine
approximation. The reduction works on integer bases with the integral
(fraction-free) Gram-Schmidt bookkeeping, so no rounding error can creep in.
A separate rational Gram-Schmidt routine checks reducedness independently.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, lcm

from src.errors import DimensionMismatchError, LatticeError, ParameterError
from src.numeric import is_integral, to_rational

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_DELTA = Fraction(3, 4)


@dataclass(frozen=True)
class LatticeBasis:
    """
    An ordered list of integer row vectors of a common dimension.

    Attributes:
        rows (tuple): Basis rows as tuples of ints
    """
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.rows)
        if rows and len({len(row) for row in rows}) != 1:
            raise DimensionMismatchError(len(rows[0]), [len(row) for row in rows], "basis row")
        object.__setattr__(self, 'rows', rows)

    @property
    def dim(self):
        return len(self.rows[0]) if self.rows else 0

    @property
    def rank(self):
        return len(self.rows)

    @classmethod
    def of(cls, basis):
        """Accept either a LatticeBasis or a plain sequence of rows."""
        return basis if isinstance(basis, cls) else cls(tuple(basis))


def _validate_delta(delta):
    delta = to_rational(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ParameterError(f"LLL parameter delta must satisfy 1/4 < delta < 1, got {delta}")
    return delta


def _idot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis, delta=DEFAULT_DELTA):
    """
    LLL-reduce an integer basis.

    Uses integral Gram-Schmidt data: d[i] is the Gram determinant of the first
    i rows and lam[k][j] = d[j+1] * mu[k][j], all exact integers.

    Args:
        basis (LatticeBasis | list): Linearly independent integer rows
        delta (Fraction): Lovasz parameter, 1/4 < delta < 1

    Returns:
        LatticeBasis: A size-reduced basis of the same lattice satisfying the
        Lovasz condition with parameter delta

    Raises:
        ParameterError: If delta is out of range
        LatticeError: If the rows are linearly dependent
    """
    delta = _validate_delta(delta)
    basis = LatticeBasis.of(basis)
    b = [list(row) for row in basis.rows]
    n = len(b)
    if n == 0:
        return basis

    lam = [[0] * n for _ in range(n)]
    d = [0] * (n + 1)
    d[0] = 1
    d[1] = _idot(b[0], b[0])
    if d[1] == 0:
        raise LatticeError("Basis rows are linearly dependent (zero row)")

    def size_reduce(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        mu = lam[k][k - 1]
        new_d = (d[k - 1] * d[k + 1] + mu * mu) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - mu * t) // d[k]
            lam[i][k - 1] = (new_d * t + mu * lam[i][k]) // d[k + 1]
        d[k] = new_d

    k, kmax, swaps = 1, 0, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _idot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise LatticeError(f"Basis rows are linearly dependent (row {k})")

        size_reduce(k, k - 1)
        mu = lam[k][k - 1]
        if delta.denominator * (d[k + 1] * d[k - 1] + mu * mu) < delta.numerator * d[k] * d[k]:
            swap(k)
            swaps += 1
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                size_reduce(k, l)
            k += 1

    logger.debug(f"LLL finished: rank {n}, dim {basis.dim}, {swaps} swaps")
    return LatticeBasis(tuple(tuple(row) for row in b))


def gram_schmidt(basis):
    """
    Exact rational Gram-Schmidt orthogonalization.

    Returns:
        tuple: (squared norms of the orthogonal vectors, mu coefficient matrix)

    Raises:
        LatticeError: If the rows are linearly dependent
    """
    rows = [[Fraction(x) for x in row] for row in LatticeBasis.of(basis).rows]
    n = len(rows)
    ortho, norms = [], []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(rows):
        v = list(row)
        for j in range(i):
            mu[i][j] = _idot(row, ortho[j]) / norms[j]
            v = [a - mu[i][j] * c for a, c in zip(v, ortho[j])]
        norm = _idot(v, v)
        if norm == 0:
            raise LatticeError(f"Basis rows are linearly dependent (row {i})")
        ortho.append(v)
        norms.append(norm)
        mu[i][i] = Fraction(1)
    return norms, mu


def is_lll_reduced(basis, delta=DEFAULT_DELTA):
    """Check size reduction (|mu| <= 1/2) and the Lovasz condition exactly."""
    delta = _validate_delta(delta)
    norms, mu = gram_schmidt(basis)
    n = len(norms)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if norms[k] < (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            return False
    return True


def _solve_left(matrix, target):
    """Solve x * matrix = target exactly for a full-row-rank matrix, or return None."""
    rows = len(matrix)
    cols = len(target)
    # Columns of the augmented system are the rows of matrix.
    system = [[Fraction(matrix[r][c]) for r in range(rows)] + [Fraction(target[c])] for c in range(cols)]
    pivots = []
    row = 0
    for col in range(rows):
        pivot = next((i for i in range(row, cols) if system[i][col] != 0), None)
        if pivot is None:
            continue
        system[row], system[pivot] = system[pivot], system[row]
        inv = 1 / system[row][col]
        system[row] = [x * inv for x in system[row]]
        for i in range(cols):
            if i != row and system[i][col] != 0:
                factor = system[i][col]
                system[i] = [x - factor * y for x, y in zip(system[i], system[row])]
        pivots.append(col)
        row += 1
    if any(all(x == 0 for x in system[i][:rows]) and system[i][rows] != 0 for i in range(cols)):
        return None
    solution = [Fraction(0)] * rows
    for i, col in enumerate(pivots):
        solution[col] = system[i][rows]
    return solution


def _determinant(matrix):
    m = [[Fraction(x) for x in row] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for i in range(col + 1, n):
            factor = m[i][col] / m[col][col]
            m[i] = [x - factor * y for x, y in zip(m[i], m[col])]
    return det


def unimodular_transform(basis, other):
    """
    Find the integer matrix U with other = U * basis and |det U| = 1.

    Args:
        basis (LatticeBasis): Reference basis
        other (LatticeBasis): Candidate basis of the same lattice

    Returns:
        tuple | None: U as a tuple of int rows, or None if the two bases do not
        span the same lattice
    """
    basis = LatticeBasis.of(basis)
    other = LatticeBasis.of(other)
    if basis.rank != other.rank or basis.dim != other.dim:
        return None
    gram_schmidt(basis)
    transform = []
    for row in other.rows:
        coefficients = _solve_left(basis.rows, row)
        if coefficients is None or not is_integral(coefficients):
            return None
        transform.append(tuple(int(c) for c in coefficients))
    if abs(_determinant(transform)) != 1:
        return None
    return tuple(transform)


def sda_exponent_bound(d, eps, q):
    """
    Exact test of q <= 2^(d(d+3)/4) * eps^(-d).

    The exponent can be fractional, so both sides are raised to the fourth power.
    """
    eps = to_rational(eps)
    # q^4 * eps^(4d) <= 2^(d(d+3))
    lhs_num = q ** 4 * eps.numerator ** (4 * d)
    rhs = (1 << (d * (d + 3))) * eps.denominator ** (4 * d)
    return lhs_num <= rhs


def sda_bound(d, eps):
    """Largest q allowed by the approximation guarantee, floor(2^(d(d+3)/4) * eps^(-d))."""
    eps = to_rational(eps)
    if not 0 < eps < 1:
        raise ParameterError(f"eps must satisfy 0 < eps < 1, got {eps}")
    fourth_power = ((1 << (d * (d + 3))) * eps.denominator ** (4 * d)) // eps.numerator ** (4 * d)
    return isqrt(isqrt(fourth_power))


def simultaneous_approx(w, eps):
    """
    Simultaneous Diophantine approximation.

    Finds q and integers p_i with 1 <= q <= 2^(d(d+3)/4) * eps^(-d) and
    |q*w_i - p_i| <= eps for every coordinate.

    Args:
        w (list): Rational coordinates with |w_i| <= 1
        eps (Fraction): Accuracy, 0 < eps < 1

    Returns:
        tuple: (q, p) with q an int and p a tuple of ints

    Raises:
        ParameterError: If eps or some |w_i| is out of range
        LatticeError: If the result fails its exact post-check
    """
    eps = to_rational(eps)
    if not 0 < eps < 1:
        raise ParameterError(f"eps must satisfy 0 < eps < 1, got {eps}")
    w = tuple(to_rational(x) for x in w)
    if any(abs(x) > 1 for x in w):
        raise ParameterError("simultaneous_approx needs |w_i| <= 1 for every coordinate")
    d = len(w)

    # Zeros and +-1 are exact for any q; equal magnitudes share one coordinate.
    core = sorted({abs(x) for x in w if 0 < abs(x) < 1})
    if not core:
        q, core_p = 1, {}
    else:
        denominator = lcm(*(x.denominator for x in core))
        if sda_exponent_bound(d, eps, denominator):
            q = denominator
            core_p = {x: int(x * q) for x in core}
        else:
            q, p = _lattice_approx(core, eps)
            core_p = dict(zip(core, p))

    p = []
    for x in w:
        if x == 0:
            p.append(0)
        elif abs(x) == 1:
            p.append(q * int(x))
        else:
            p.append(core_p[abs(x)] if x > 0 else -core_p[abs(x)])
    p = tuple(p)

    if q < 1 or not sda_exponent_bound(d, eps, q):
        raise LatticeError(f"Approximation denominator {q} violates its bound")
    if any(abs(q * x - pi) > eps for x, pi in zip(w, p)):
        raise LatticeError("Approximation error exceeds eps")
    return q, p


def _lattice_approx(core, eps):
    """Run LLL on the scaled approximation lattice for coordinates in (0, 1)."""
    n = len(core)
    scale_exponent = -(-n * (n + 1) // 4)
    weight = eps ** (n + 1) / (1 << scale_exponent)
    factor = lcm(weight.denominator, *(x.denominator for x in core))
    first = [int(weight * factor)] + [int(x * factor) for x in core]
    rows = [first]
    for j in range(n):
        row = [0] * (n + 1)
        row[j + 1] = -factor
        rows.append(row)
    reduced = lll_reduce(LatticeBasis(tuple(tuple(r) for r in rows)))
    shortest = reduced.rows[0]
    q = shortest[0] // first[0]
    if q < 0:
        q = -q
        shortest = tuple(-x for x in shortest)
    p = []
    for x, entry in zip(core, shortest[1:]):
        value = Fraction(q * int(x * factor) - entry, factor)
        if value.denominator != 1:
            raise LatticeError("Lattice vector does not decode to integer numerators")
        p.append(int(value))
    logger.debug(f"Lattice approximation in dimension {n}: q has {q.bit_length()} bits")
    return q, tuple(p)
