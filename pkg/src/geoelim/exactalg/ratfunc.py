"""Rational functions as normalized numerator/denominator pairs."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .polynomial import Polynomial
from .rational import is_rational, qnorm


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if is_rational(x):
        return Polynomial.const(x)
    raise TypeError(f"cannot use {x!r} as a polynomial")


class RationalFunction:
    """``num / den`` with ``den`` nonzero.

    The pair is normalized so that ``den`` is a primitive integer polynomial
    with positive leading coefficient; when ``den`` divides ``num`` exactly the
    quotient replaces the pair.  Equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = _as_poly(num)
        den = _as_poly(den)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num:
            self.num = Polynomial.zero(num.indeterminates)
            self.den = Polynomial.const(1)
            return
        if not den.is_constant():
            q = num.exact_div(den)
            if q is not None:
                num, den = q, Polynomial.const(1)
        if den.is_constant():
            self.num = num / den.constant_value()
            self.den = Polynomial.const(1)
            return
        scale = den.content()
        if den.leading_coefficient() < 0:
            scale = -scale
        self.num = num / scale
        self.den = den / scale

    @classmethod
    def of(cls, x) -> "RationalFunction":
        return x if isinstance(x, RationalFunction) else cls(x)

    @classmethod
    def parse(cls, text: str) -> "RationalFunction":
        """Parse ``"poly"`` or ``"(poly)/(poly)"``."""
        text = text.strip()
        split = _split_fraction(text)
        if split is None:
            return cls(Polynomial.parse(text))
        a, b = split
        return cls(Polynomial.parse(a), Polynomial.parse(b))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise ValueError("rational function has a nonconstant denominator")
        return self.num / self.den.constant_value()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        return qnorm(Fraction(self.num.constant_value()) / self.den.constant_value())

    def used_variables(self):
        seen = list(self.num.used_variables())
        seen += [v for v in self.den.used_variables() if v not in seen]
        return tuple(seen)

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, (Polynomial, int, Fraction)):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self) -> int:
        if self.is_polynomial():
            return hash(self.as_polynomial())
        # normalization is not canonical without gcds
        return hash("RationalFunction")

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial) or is_rational(other):
            return RationalFunction(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        r = object.__new__(RationalFunction)
        r.num, r.den = -self.num, self.den
        return r

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(self.den ** (-k), self.num ** (-k))
        return RationalFunction(self.num ** k, self.den ** k)

    def evaluate(self, point: Mapping[str, object]):
        """Value at a point; ZeroDivisionError when the denominator vanishes."""
        d = self.den.evaluate(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the point")
        n = self.num.evaluate(point)
        if is_rational(n) and is_rational(d):
            return qnorm(Fraction(n) / d)
        return n / d

    def subs(self, mapping) -> "RationalFunction":
        return RationalFunction(self.num.subs(mapping), self.den.subs(mapping))

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.as_polynomial())
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"


def _split_fraction(text: str):
    """Split ``"(a)/(b)"`` at the top-level slash, or return None."""
    if not text.startswith("("):
        return None
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                rest = text[i + 1:].lstrip()
                if rest.startswith("/") and rest[1:].lstrip().startswith("("):
                    b = rest[1:].strip()
                    if b.endswith(")"):
                        return text[1:i], b[1:-1]
                return None
    return None
