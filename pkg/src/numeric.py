"""
Numeric Module

This module provides the exact arithmetic used everywhere in the toolkit.
Python ints serve as big integers and fractions.Fraction as exact rationals,
so every value is stored in lowest terms with a positive denominator.
No floating point is accepted or produced.
"""

import re
import sys
import logging
from fractions import Fraction
from math import lcm

from src.errors import DimensionMismatchError, InstanceFormatError, ValidationError

# Setup logging
logger = logging.getLogger(__name__)

# Bounds and kernel weights routinely exceed the default int/str digit limit.
if hasattr(sys, 'set_int_max_str_digits'):
    sys.set_int_max_str_digits(0)

_RATIONAL_PATTERN = re.compile(r'^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$')


def to_rational(value):
    """
    Convert an int, Fraction or "p/q" string into a Fraction.

    Args:
        value (int | Fraction | str): Value to convert

    Returns:
        Fraction: The exact rational

    Raises:
        ValidationError: For floats, bools or other unsupported types
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValidationError(f"Inexact value {value!r} is not allowed; use int, Fraction or 'p/q'")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ValidationError(f"Unsupported numeric type {type(value).__name__}")


def to_rationals(values):
    """Convert an iterable of numbers into a tuple of Fractions."""
    return tuple(to_rational(v) for v in values)


def parse_rational(text):
    """
    Parse a decimal "p/q" (or "p") string.

    Args:
        text (str): Text to parse

    Returns:
        Fraction: Parsed value in lowest terms

    Raises:
        InstanceFormatError: If the text is not a rational literal or q is zero
    """
    match = _RATIONAL_PATTERN.match(text)
    if not match:
        raise InstanceFormatError(f"Not a rational literal: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise InstanceFormatError(f"Zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value):
    """Render a rational as "p/q", dropping "/1" for integers."""
    value = to_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rat_add(a, b):
    """Exact sum of two rationals."""
    return Fraction(a) + Fraction(b)


def rat_sub(a, b):
    """Exact difference a - b."""
    return Fraction(a) - Fraction(b)


def rat_mul(a, b):
    """Exact product; zero absorbs."""
    return Fraction(a) * Fraction(b)


def rat_div(a, b):
    """
    Exact quotient a / b.

    Raises:
        ZeroDivisionError: If b is zero
    """
    return Fraction(a) / Fraction(b)


def rat_cmp(a, b):
    """Three-way comparison returning -1, 0 or +1."""
    return signum(rat_sub(a, b))


def signum(a):
    """Sign of a rational: 1 if positive, -1 if negative, 0 otherwise."""
    if a > 0:
        return 1
    if a < 0:
        return -1
    return 0


def _check_same_length(u, v):
    if len(u) != len(v):
        raise DimensionMismatchError(len(u), len(v))


def dot(u, v):
    """
    Exact inner product of two equal-length vectors.

    Raises:
        DimensionMismatchError: If the lengths differ
    """
    _check_same_length(u, v)
    return Fraction(sum(a * b for a, b in zip(u, v)))


def l1(v):
    return Fraction(sum(abs(x) for x in v))


def linf(v):
    return Fraction(max((abs(x) for x in v), default=0))


def vec_sub(u, v):
    """Entrywise difference of two equal-length vectors."""
    _check_same_length(u, v)
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v):
    """Multiply every entry of v by c."""
    return tuple(c * x for x in v)


def is_integral(v):
    """True when every entry has denominator 1."""
    return all(Fraction(x).denominator == 1 for x in v)


def common_denominator(v):
    """Least common multiple of all denominators (1 for an empty vector)."""
    return lcm(1, *(Fraction(x).denominator for x in v))


def scale_to_integers(v):
    """
    Multiply a rational vector by the lcm of its denominators.

    The scale factor is positive, so every sign of a linear form is kept.
    """
    if is_integral(v):
        return tuple(int(x) for x in v)
    factor = common_denominator(v)
    return tuple(int(Fraction(x) * factor) for x in v)


def bit_length_of(x):
    """Bits needed for the larger of numerator and denominator of x."""
    x = Fraction(x)
    return max(abs(x.numerator).bit_length(), x.denominator.bit_length())


def max_bits(v):
    """Largest bit_length_of over a vector (0 for an empty vector)."""
    return max((bit_length_of(x) for x in v), default=0)
