"""Sparse multivariate polynomials over the rationals.

A :class:`Polynomial` carries an ordered tuple of indeterminate names and a
map from exponent vectors to nonzero rational coefficients.  Binary
operations between polynomials over different indeterminate tuples first
merge the tuples (left operand's order first), so ``x + y`` just works.

Equality is mathematical: two polynomials are equal when they have the same
nonzero terms, regardless of unused indeterminates or declaration order.
Terms are listed in graded-lexicographic order with respect to the declared
indeterminate order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .rational import format_rational, is_rational, qnorm

Exps = Tuple[int, ...]


class UnknownSymbol(KeyError):
    """Raised when an operation names an indeterminate the polynomial lacks."""


def _merge_vars(a: Tuple[str, ...], b: Tuple[str, ...]) -> Tuple[str, ...]:
    if a == b:
        return a
    seen = set(a)
    return a + tuple(v for v in b if v not in seen)


def _remap(terms: Dict[Exps, object], old: Tuple[str, ...], new: Tuple[str, ...]) -> Dict[Exps, object]:
    if old == new:
        return terms
    pos = [new.index(v) for v in old]
    width = len(new)
    out = {}
    for exps, c in terms.items():
        e = [0] * width
        for p, k in zip(pos, exps):
            e[p] = k
        out[tuple(e)] = c
    return out


def _grlex_key(exps: Exps):
    return (sum(exps), exps)


class Polynomial:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("_vars", "_terms", "_key")

    def __init__(self, terms: Optional[Mapping[Sequence[int], object]] = None,
                 indeterminates: Iterable[str] = ()):
        names = tuple(indeterminates)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate indeterminates in {names}")
        clean: Dict[Exps, object] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(names):
                raise ValueError("exponent vector length does not match indeterminates")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = qnorm(c)
            if c:
                clean[exps] = qnorm(clean.get(exps, 0) + c)
                if not clean[exps]:
                    del clean[exps]
        self._vars = names
        self._terms = clean
        self._key = None

    @classmethod
    def _raw(cls, names: Tuple[str, ...], terms: Dict[Exps, object]) -> "Polynomial":
        p = object.__new__(cls)
        p._vars = names
        p._terms = terms
        p._key = None
        return p

    # construction helpers
    @classmethod
    def const(cls, c, indeterminates: Iterable[str] = ()) -> "Polynomial":
        names = tuple(indeterminates)
        c = qnorm(c)
        return cls._raw(names, {(0,) * len(names): c} if c else {})

    @classmethod
    def var(cls, name: str, indeterminates: Optional[Iterable[str]] = None) -> "Polynomial":
        names = tuple(indeterminates) if indeterminates is not None else (name,)
        if name not in names:
            names = names + (name,)
        e = [0] * len(names)
        e[names.index(name)] = 1
        return cls._raw(names, {tuple(e): 1})

    @classmethod
    def zero(cls, indeterminates: Iterable[str] = ()) -> "Polynomial":
        return cls._raw(tuple(indeterminates), {})

    @classmethod
    def parse(cls, text: str, indeterminates: Optional[Iterable[str]] = None) -> "Polynomial":
        """Parse polynomial text in the formula term syntax (``3*x1^2 - 1/2*u1``)."""
        from ..formula.parser import parse_term
        from ..formula.terms import term_to_poly

        p = term_to_poly(parse_term(text))
        if indeterminates is not None:
            p = p.with_indeterminates(indeterminates)
        return p

    # basic accessors
    @property
    def indeterminates(self) -> Tuple[str, ...]:
        return self._vars

    @property
    def terms(self) -> Dict[Exps, object]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Exps, object]]:
        """Terms in graded-lex order, highest first."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Exps, object]]:
        return iter(self.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or all(not any(e) for e in self._terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self._terms.values()), 0)

    def used_variables(self) -> Tuple[str, ...]:
        used = [False] * len(self._vars)
        for exps in self._terms:
            for i, e in enumerate(exps):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self._vars, used) if u)

    def with_indeterminates(self, names: Iterable[str]) -> "Polynomial":
        """Re-express over ``names``; raises if a used variable is missing."""
        names = tuple(names)
        missing = [v for v in self.used_variables() if v not in names]
        if missing:
            raise UnknownSymbol(missing[0])
        keep = [i for i, v in enumerate(self._vars) if v in names]
        sub = tuple(self._vars[i] for i in keep)
        terms = {tuple(e[i] for i in keep): c for e, c in self._terms.items()}
        return Polynomial._raw(names, _remap(terms, sub, names))

    def degree(self, var: Optional[str] = None) -> int:
        """Total degree, or degree in ``var``; the zero polynomial has degree -1."""
        if not self._terms:
            return -1
        if var is None:
            return max(sum(e) for e in self._terms)
        if var not in self._vars:
            return 0
        i = self._vars.index(var)
        return max(e[i] for e in self._terms)

    def leading_term(self) -> Tuple[Exps, object]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self._terms, key=_grlex_key)
        return exps, self._terms[exps]

    def leading_coefficient(self):
        return self.leading_term()[1] if self._terms else 0

    def coefficient(self, monomial: Mapping[str, int]):
        e = tuple(monomial.get(v, 0) for v in self._vars)
        if any(k for v, k in monomial.items() if v not in self._vars and k):
            return 0
        return self._terms.get(e, 0)

    # canonical identity
    def _canon(self):
        if self._key is None:
            names = self._vars
            self._key = frozenset(
                (tuple(sorted((names[i], k) for i, k in enumerate(e) if k)), c)
                for e, c in self._terms.items()
            )
        return self._key

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            if self._vars == other._vars:
                return self._terms == other._terms
            return self._canon() == other._canon()
        if is_rational(other):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._canon())

    # arithmetic
    def _coerce(self, other) -> Optional["Polynomial"]:
        if isinstance(other, Polynomial):
            return other
        if is_rational(other):
            return Polynomial.const(other, self._vars)
        return None

    def _aligned(self, other: "Polynomial"):
        names = _merge_vars(self._vars, other._vars)
        return (names, _remap(self._terms, self._vars, names),
                _remap(other._terms, other._vars, names))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o._terms and (o._vars == self._vars or set(o._vars) <= set(self._vars)):
            return self
        if not self._terms and self._vars == o._vars:
            return o
        names, a, b = self._aligned(o)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = qnorm(s)
                else:
                    del out[e]
        return Polynomial._raw(names, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self._vars, {e: -c for e, c in self._terms.items()})

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

    def scale(self, c) -> "Polynomial":
        c = qnorm(c)
        if not c:
            return Polynomial._raw(self._vars, {})
        if c == 1:
            return self
        return Polynomial._raw(self._vars, {e: qnorm(v * c) for e, v in self._terms.items()})

    def __mul__(self, other):
        if is_rational(other):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        names, a, b = self._aligned(other)
        if not a or not b:
            return Polynomial._raw(names, {})
        if len(a) < len(b):
            a, b = b, a
        out: Dict[Exps, object] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple([x + y for x, y in zip(ea, eb)])
                out[e] = get(e, 0) + ca * cb
        return Polynomial._raw(names, {e: qnorm(c) for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if is_rational(other):
            if not other:
                raise ZeroDivisionError("polynomial division by zero")
            return self.scale(Fraction(1) / qnorm(other))
        if isinstance(other, Polynomial) and other.is_constant():
            return self / other.constant_value()
        return NotImplemented

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.const(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div(self, other: "Polynomial") -> Optional["Polynomial"]:
        """Quotient ``self / other`` if ``other`` divides exactly, else None."""
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        names, rem, div = self._aligned(other)
        rem = dict(rem)
        lead = max(div, key=_grlex_key)
        lc = div[lead]
        quot: Dict[Exps, object] = {}
        while rem:
            e = max(rem, key=_grlex_key)
            if any(x < y for x, y in zip(e, lead)):
                return None
            shift = tuple(x - y for x, y in zip(e, lead))
            c = qnorm(Fraction(rem[e]) / lc)
            quot[shift] = c
            for ed, cd in div.items():
                t = tuple(x + y for x, y in zip(ed, shift))
                v = rem.get(t, 0) - c * cd
                if v:
                    rem[t] = qnorm(v)
                else:
                    rem.pop(t, None)
        return Polynomial._raw(names, quot)

    # content
    def content(self):
        """Positive rational ``c`` with ``self / c`` integral and primitive."""
        from math import gcd
        if not self._terms:
            return 1
        num = 0
        den = 1
        for c in self._terms.values():
            f = Fraction(c)
            num = gcd(num, f.numerator)
            den = den * f.denominator // gcd(den, f.denominator)
        return qnorm(Fraction(num, den))

    # structure in one variable
    def coeffs_in(self, var: str) -> List["Polynomial"]:
        """``[c0, ..., cd]`` with ``self = sum c_j * var**j``; each c_j free of var."""
        if var not in self._vars:
            raise UnknownSymbol(var)
        i = self._vars.index(var)
        rest = self._vars[:i] + self._vars[i + 1:]
        d = self.degree(var)
        buckets: List[Dict[Exps, object]] = [dict() for _ in range(max(d, 0) + 1)]
        for e, c in self._terms.items():
            buckets[e[i]][e[:i] + e[i + 1:]] = c
        return [Polynomial._raw(rest, b) for b in buckets]

    def is_monic_in(self, var: str) -> bool:
        if var not in self._vars or not self._terms:
            return False
        top = self.coeffs_in(var)[-1]
        return top == 1

    def diff(self, var: str) -> "Polynomial":
        if var not in self._vars:
            return Polynomial._raw(self._vars, {})
        i = self._vars.index(var)
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = qnorm(c * e[i])
        return Polynomial._raw(self._vars, out)

    # evaluation / substitution
    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at numeric values (rationals or any number-like type)."""
        values = []
        for v in self._vars:
            if v in point:
                values.append(point[v])
            elif any(e[self._vars.index(v)] for e in self._terms):
                from .rings import MissingAssignment
                raise MissingAssignment(v)
            else:
                values.append(0)
        total = 0
        for e, c in self._terms.items():
            term = c
            for x, k in zip(values, e):
                if k:
                    term = term * x ** k
            total = total + term
        return qnorm(total) if is_rational(total) else total

    def subs(self, mapping: Mapping[str, object]) -> "Polynomial":
        """Substitute polynomials or rationals for some indeterminates."""
        keep = tuple(v for v in self._vars if v not in mapping)
        result = Polynomial.zero(keep)
        cache: Dict[Tuple[str, int], Polynomial] = {}
        for e, c in self._terms.items():
            rest = []
            term = Polynomial.const(c, keep)
            for v, k in zip(self._vars, e):
                if v in mapping:
                    if k:
                        key = (v, k)
                        if key not in cache:
                            val = mapping[v]
                            if not isinstance(val, Polynomial):
                                val = Polynomial.const(val)
                            cache[key] = val ** k
                        term = term * cache[key]
                else:
                    rest.append(k)
            if rest and any(rest):
                term = term * Polynomial._raw(keep, {tuple(rest): 1})
            result = result + term
        return result

    # rendering
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self._vars, e) if k
            )
            neg = c < 0
            a = -c if neg else c
            if mono:
                body = mono if a == 1 else f"{format_rational(a)}*{mono}"
            else:
                body = format_rational(a)
            parts.append(("-" if neg else "+", body))
        sign, body = parts[0]
        if sign == "-" and "^" in body.split("*")[0]:
            # a leading minus binds tighter than ^ in the term syntax
            body = "1*" + body
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, {self._vars!r})"


def poly_var(name: str) -> Polynomial:
    return Polynomial.var(name)


def poly_vars(*names: str) -> Tuple[Polynomial, ...]:
    return tuple(Polynomial.var(n, names) for n in names)
