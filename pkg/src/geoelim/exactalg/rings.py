"""Commutative ring descriptors and evaluation of polynomials in them.

A ring descriptor bundles the five ring operations with ``zero``, ``one``
and the embedding of rational constants.  Matrix rings over polynomial
rings are ordinary targets: evaluating ``g(u, x)`` with ``x_i`` mapped to
multiplication matrices is how elimination computes ``g(u, M)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .matrix import Matrix
from .polynomial import Polynomial
from .rational import is_rational, qnorm
from .ratfunc import RationalFunction


class MissingAssignment(KeyError):
    """An indeterminate that occurs in the polynomial has no value."""


class RingMismatch(TypeError):
    """An assigned value does not belong to the target ring."""


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = qnorm(re)
        self.im = qnorm(im)

    @classmethod
    def of(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        return cls(x, 0)

    def _c(self, other):
        if isinstance(other, GaussianRational):
            return other
        if is_rational(other):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("division by zero")
        return GaussianRational(Fraction(self.re * o.re + self.im * o.im) / n,
                                Fraction(self.im * o.re - self.re * o.im) / n)

    def __pow__(self, k: int):
        out = GaussianRational(1, 0)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


class Ring:
    """Descriptor contract: override what differs from Python operators."""

    name = "ring"

    @property
    def zero(self):
        return self.from_rational(0)

    @property
    def one(self):
        return self.from_rational(1)

    def from_rational(self, c):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def coerce(self, x):
        if is_rational(x):
            return self.from_rational(x)
        if not self.contains(x):
            raise RingMismatch(f"{x!r} is not an element of {self.name}")
        return x

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def scale(self, a, c):
        """Multiply ``a`` by the rational ``c``."""
        return a * qnorm(c)

    def is_zero(self, a) -> bool:
        return not a


class RationalField(Ring):
    name = "QQ"

    def from_rational(self, c):
        return qnorm(c)

    def contains(self, x) -> bool:
        return is_rational(x)

    def inverse(self, a):
        return qnorm(Fraction(1) / a)


class GaussianField(Ring):
    name = "QQ(i)"

    def from_rational(self, c):
        return GaussianRational(c, 0)

    def contains(self, x) -> bool:
        return isinstance(x, GaussianRational)


class PolynomialRing(Ring):
    def __init__(self, indeterminates=()):
        self.indeterminates = tuple(indeterminates)
        self.name = f"QQ[{','.join(self.indeterminates)}]"
        self._zero = Polynomial.zero(self.indeterminates)

    @property
    def zero(self):
        return self._zero

    def from_rational(self, c):
        c = qnorm(c)
        if not c:
            return self._zero
        return Polynomial.const(c, self.indeterminates)

    def contains(self, x) -> bool:
        return isinstance(x, Polynomial)

    def coerce(self, x):
        if isinstance(x, RationalFunction) and x.is_polynomial():
            return x.as_polynomial()
        return super().coerce(x)

    def scale(self, a, c):
        return a.scale(c)


class RationalFunctionField(Ring):
    name = "QQ(u)"

    def from_rational(self, c):
        return RationalFunction(c)

    def contains(self, x) -> bool:
        return isinstance(x, RationalFunction)

    def coerce(self, x):
        if isinstance(x, Polynomial):
            return RationalFunction(x)
        return super().coerce(x)


class MatrixRing(Ring):
    """Square ``size x size`` matrices over ``base``; constants map to ``c*I``."""

    def __init__(self, size: int, base: Ring):
        self.size = size
        self.base = base
        self.name = f"Mat{size}({base.name})"

    def from_rational(self, c):
        return Matrix.identity(self.size, one=self.base.from_rational(c),
                               zero=self.base.zero)

    def embed(self, b):
        """Scalar matrix ``b*I`` for a base-ring element ``b``."""
        return Matrix.identity(self.size, one=self.base.coerce(b), zero=self.base.zero)

    def contains(self, x) -> bool:
        return isinstance(x, Matrix) and x.rows == self.size and x.cols == self.size

    def coerce(self, x):
        if isinstance(x, Matrix):
            if not self.contains(x):
                raise RingMismatch(f"matrix of shape {x.shape} is not in {self.name}")
            return x.map(self.base.coerce, zero=self.base.zero)
        if is_rational(x):
            return self.from_rational(x)
        try:
            return self.embed(x)
        except (RingMismatch, TypeError) as exc:
            raise RingMismatch(f"{x!r} is not an element of {self.name}") from exc

    def scale(self, a, c):
        return a.scale(c)

    def is_zero(self, a) -> bool:
        return a.is_zero()


QQ = RationalField()


def poly_eval_generic(p: Polynomial, assignment: Mapping[str, object], ring: Ring):
    """Image of ``p`` under the ring homomorphism extending ``assignment``.

    Rational values in ``assignment`` are embedded through
    ``ring.from_rational``; other values must already be ring elements.
    """
    used = p.used_variables()
    for v in used:
        if v not in assignment:
            raise MissingAssignment(v)
    values = {v: ring.coerce(assignment[v]) for v in used}
    names = p.indeterminates
    powers: Dict[Tuple[str, int], object] = {}

    def power(v: str, k: int):
        key = (v, k)
        if key not in powers:
            if k == 1:
                powers[key] = values[v]
            else:
                half = power(v, k // 2)
                sq = ring.mul(half, half)
                powers[key] = ring.mul(sq, values[v]) if k % 2 else sq
        return powers[key]

    total = None
    for exps, c in p.items():
        mono: Optional[object] = None
        for v, k in zip(names, exps):
            if k:
                pw = power(v, k)
                mono = pw if mono is None else ring.mul(mono, pw)
        term = ring.from_rational(c) if mono is None else ring.scale(mono, c)
        total = term if total is None else ring.add(total, term)
    return ring.zero if total is None else total
