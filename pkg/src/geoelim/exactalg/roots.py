"""Rational roots of univariate polynomials (rational root theorem)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import List, Optional

from .polynomial import Polynomial
from .rational import qnorm

_DIVISOR_LIMIT = 10 ** 10


def _divisors(k: int) -> Optional[List[int]]:
    k = abs(k)
    if k > _DIVISOR_LIMIT:
        return None
    small, large = [], []
    for d in range(1, isqrt(k) + 1):
        if k % d == 0:
            small.append(d)
            if d * d != k:
                large.append(k // d)
    return small + large[::-1]


def rational_roots(p: Polynomial, var: Optional[str] = None) -> List:
    """Distinct rational roots of a univariate ``p``, ascending.

    Returns a possibly incomplete list when the coefficients are too large to
    enumerate divisors.  The zero polynomial has no listed roots.
    """
    used = p.used_variables()
    if var is None:
        if len(used) > 1:
            raise ValueError("rational_roots needs a univariate polynomial")
        var = used[0] if used else "x"
    elif any(v != var for v in used):
        raise ValueError("rational_roots needs a univariate polynomial")
    if p.is_zero() or p.is_constant():
        return []
    coeffs = [Fraction(c.constant_value()) for c in p.coeffs_in(var)]
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in coeffs]
    roots = set()
    low = 0
    while ints[low] == 0:
        low += 1
    if low:
        roots.add(0)
    ints = ints[low:]
    if len(ints) > 1:
        ps, qs = _divisors(ints[0]), _divisors(ints[-1])
        if ps is not None and qs is not None:
            for a in ps:
                for b in qs:
                    for cand in (Fraction(a, b), Fraction(-a, b)):
                        if cand in roots:
                            continue
                        acc = Fraction(0)
                        for c in reversed(ints):
                            acc = acc * cand + c
                        if acc == 0:
                            roots.add(cand)
    return sorted(qnorm(r) for r in roots)
