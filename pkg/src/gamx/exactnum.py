"""Exact arithmetic over rationals extended with square roots.

A value is stored as  q_1*sqrt(d_1) + ... + q_m*sqrt(d_m)  with rational
coefficients q_j and distinct square-free integer radicands d_j (d = 1 is the
rational part).  Distinct square-free radicals are linearly independent over
the rationals, so a value is zero exactly when every coefficient is zero; a
nonzero value gets its sign from interval refinement of the radicals, which
must terminate.

This is all the algebra the cubic analysis needs: the derivative of a
degree-3 polynomial has degree 2, so its roots are rational or quadratic
surds, and evaluating a polynomial at a surd stays inside the same quadratic
field.  Sums of such values across features remain representable because the
form is closed under addition and multiplication.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Union

from sympy import factorint

Rat = Union[int, Fraction]
ExactValue = Union[Fraction, "ExactReal"]

_MAX_REFINE_BITS = 16384


def _sqrt_decompose(n: int) -> tuple[int, int]:
    """n = square * free with free square-free; returns (sqrt(square), free)."""
    if n == 0:
        return 0, 1
    root = isqrt(n)
    if root * root == n:
        return root, 1
    outside, free = 1, 1
    for p, e in factorint(n).items():
        outside *= p ** (e // 2)
        if e % 2:
            free *= p
    return outside, free


def _sqrt_bounds(d: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(d) <= hi with hi - lo <= 2**-bits."""
    n = isqrt(d << (2 * bits))
    scale = 1 << bits
    return Fraction(n, scale), Fraction(n + 1, scale)


class ExactReal:
    """Immutable exact real of the form sum of rational multiples of radicals."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, Fraction]):
        self._terms = {d: q for d, q in terms.items() if q != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rational(cls, q: Rat) -> "ExactReal":
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, radicand: Rat) -> "ExactReal":
        """Exact sqrt of a non-negative rational."""
        r = Fraction(radicand)
        if r < 0:
            raise ValueError("square root of a negative rational")
        if r == 0:
            return cls({})
        # sqrt(p/q) = sqrt(p*q) / q
        outside, free = _sqrt_decompose(r.numerator * r.denominator)
        return cls({free: Fraction(outside, r.denominator)})

    # -- representation ----------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("value is irrational: %r" % self)
        return self._terms.get(1, Fraction(0))

    def __float__(self) -> float:
        total = 0.0
        for d, q in self._terms.items():
            total += float(q) * (d ** 0.5)
        return total

    def __repr__(self) -> str:
        if not self._terms:
            return "ExactReal(0)"
        parts = []
        for d in sorted(self._terms):
            q = self._terms[d]
            parts.append(str(q) if d == 1 else f"{q}*sqrt({d})")
        return "ExactReal(%s)" % " + ".join(parts)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "ExactReal":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for d, q in other._terms.items():
            terms[d] = terms.get(d, Fraction(0)) + q
        return ExactReal(terms)

    __radd__ = __add__

    def __neg__(self) -> "ExactReal":
        return ExactReal({d: -q for d, q in self._terms.items()})

    def __sub__(self, other) -> "ExactReal":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ExactReal":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "ExactReal":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict[int, Fraction] = {}
        for d1, q1 in self._terms.items():
            for d2, q2 in other._terms.items():
                # sqrt(d1)*sqrt(d2) = g*sqrt((d1/g)*(d2/g)) with g = gcd;
                # the cofactors are coprime and square-free, so their product
                # is square-free already.
                g = gcd(d1, d2)
                d = (d1 // g) * (d2 // g)
                q = q1 * q2 * g
                terms[d] = terms.get(d, Fraction(0)) + q
        return ExactReal(terms)

    __rmul__ = __mul__

    # -- order -------------------------------------------------------------

    def sign(self) -> int:
        if not self._terms:
            return 0
        if self.is_rational:
            q = self._terms[1]
            return (q > 0) - (q < 0)
        bits = 16
        while bits <= _MAX_REFINE_BITS:
            lo = Fraction(0)
            hi = Fraction(0)
            for d, q in self._terms.items():
                if d == 1:
                    lo += q
                    hi += q
                    continue
                blo, bhi = _sqrt_bounds(d, bits)
                if q > 0:
                    lo += q * blo
                    hi += q * bhi
                else:
                    lo += q * bhi
                    hi += q * blo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
        raise ArithmeticError("sign refinement did not converge: %r" % self)

    def _cmp(self, other) -> int:
        diff = self - _coerce_strict(other)
        return diff.sign()

    def __eq__(self, other) -> bool:
        coerced = _coerce(other)
        if coerced is NotImplemented:
            return NotImplemented
        return self._terms == coerced._terms

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def floor(self) -> int:
        """Largest integer <= self, computed exactly."""
        if self.is_rational:
            q = self._terms.get(1, Fraction(0))
            return q.numerator // q.denominator
        n = int(float(self) // 1)
        # float rounding can be off by one either way near an integer
        while ExactReal.from_rational(n + 1) <= self:
            n += 1
        while ExactReal.from_rational(n) > self:
            n -= 1
        return n

    def ceil(self) -> int:
        # irrational values never sit on an integer, so ceil = floor + 1
        if self.is_rational:
            q = self._terms.get(1, Fraction(0))
            return -((-q.numerator) // q.denominator)
        return self.floor() + 1


def _coerce(value) -> "ExactReal":
    if isinstance(value, ExactReal):
        return value
    if isinstance(value, (int, Fraction)):
        return ExactReal.from_rational(value)
    return NotImplemented


def _coerce_strict(value) -> "ExactReal":
    coerced = _coerce(value)
    if coerced is NotImplemented:
        raise TypeError("cannot coerce %r to ExactReal" % (value,))
    return coerced


# -- helpers over the Fraction | ExactReal union ----------------------------


def exact_sign(value: ExactValue) -> int:
    if isinstance(value, ExactReal):
        return value.sign()
    return (value > 0) - (value < 0)


def exact_lt(a: ExactValue, b: ExactValue) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a < b
    return _coerce_strict(a) < b


def exact_le(a: ExactValue, b: ExactValue) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return _coerce_strict(a) <= b


def exact_add(a: ExactValue, b: ExactValue) -> ExactValue:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return _coerce_strict(a) + b


def exact_neg(a: ExactValue) -> ExactValue:
    return -a


def exact_floor(a: ExactValue) -> int:
    if isinstance(a, Fraction):
        return a.numerator // a.denominator
    return a.floor()


def exact_ceil(a: ExactValue) -> int:
    if isinstance(a, Fraction):
        return -((-a.numerator) // a.denominator)
    return a.ceil()


def as_fraction_or_none(a: ExactValue) -> Fraction | None:
    if isinstance(a, Fraction):
        return a
    if a.is_rational:
        return a.as_fraction()
    return None


def simplify(a: ExactValue) -> ExactValue:
    """Collapse an ExactReal that is secretly rational back to Fraction."""
    if isinstance(a, ExactReal) and a.is_rational:
        return a.as_fraction()
    return a
