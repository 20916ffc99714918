"""Rational coefficient helpers.

Coefficients are plain ``int`` or :class:`fractions.Fraction` values.  A
Fraction whose denominator is 1 is collapsed back to ``int`` so that big
integer arithmetic stays on the fast path.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[int, Fraction]


def qnorm(c) -> RationalLike:
    """Return ``c`` as an ``int`` if integral, else as a reduced Fraction."""
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return qnorm(Fraction(c.numerator, c.denominator))
    if isinstance(c, str):
        return parse_rational(c)
    raise TypeError(f"not a rational: {c!r}")


def is_rational(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def parse_rational(text: str) -> RationalLike:
    """Parse ``"p"`` or ``"p/q"`` (optionally signed)."""
    text = text.strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise ValueError(f"malformed rational {text!r}")
    return qnorm(value)


def format_rational(c) -> str:
    """Reduced ``"p/q"`` text; integers are written without a denominator."""
    c = qnorm(c)
    if isinstance(c, int):
        return str(c)
    return f"{c.numerator}/{c.denominator}"
