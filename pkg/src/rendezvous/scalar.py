"""Exact rational scalars for one-dimensional robot geometry.

All positions, destinations, and truncation points are `fractions.Fraction`
values so that coincidence tests and distance ratios are decidable exactly.
The text form is the canonical reduced "p/q" (or "p" for integers) that
`Fraction` itself produces.
"""

from __future__ import annotations

from fractions import Fraction

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def scalar(value: int | str | Fraction) -> Fraction:
    """Parse a scalar from its text form ("p/q" or "p") or coerce a number."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value).strip())


def format_scalar(value: Fraction) -> str:
    """Canonical text form: reduced "p/q", or bare "p" when q == 1."""
    return str(Fraction(value))


def convex_point(a: Fraction, b: Fraction, lam: Fraction) -> Fraction:
    """The affine combination (1 - lam)*a + lam*b.

    lam is not restricted to [0, 1]; rule tables may use any rational
    coefficient, so the result can lie outside the segment [a, b].
    """
    return (1 - lam) * a + lam * b


def on_segment(p: Fraction, a: Fraction, b: Fraction) -> bool:
    """True iff p lies on the closed segment between a and b."""
    lo, hi = (a, b) if a <= b else (b, a)
    return lo <= p <= hi
