"""Extended-precision helpers shared by the geometric modules.

All transcendental work runs under an explicit mpmath working precision; the
conventions here keep conversions from exact rationals loss-free (dyadic
inputs convert exactly at any precision) and provide a uniform, conservative
model for accumulated arithmetic error.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mp


def default_precision(table) -> int:
    """Working precision in bits for a sequence table: twice the bits of the
    finest angle step plus guard bits, floored at 128."""
    return max(128, 2 * table.min_scale_bits() + 64)


def frac_to_mpf(x: Fraction):
    """Fraction -> mpf at the current working precision.

    Exact whenever numerator and denominator fit the precision; all dyadic
    table entries are powers of two times small integers, hence exact.
    """
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)


def rot(angle: Fraction):
    """Clockwise rotation factor e^{-i*angle} for an exact rational angle."""
    return mpmath.expj(-frac_to_mpf(angle))


def as_xy(z) -> tuple:
    """Complex point -> (x, y)."""
    return (z.real, z.imag)


def arith_error(prec: int, scale: float = 1.0, ops: int = 64) -> float:
    """Conservative absolute error bound for a value of magnitude ~scale
    computed with ~ops rounded operations at `prec` bits."""
    return float(scale) * ops * 2.0 ** (-prec)


def workprec(prec: int):
    """Context manager setting the mpmath working precision."""
    return mp.workprec(prec)
