"""Small exact toolkit for univariate polynomials with rational coefficients.

Polynomials are tuples of Fractions, highest degree first, matching the
on-disk coefficient order.  Everything here is exact: evaluation supports
quadratic-surd arguments, roots of degree <= 2 are returned in closed form,
and integer-range sums use the closed-form power-sum polynomials (valid for
arbitrary integer bounds by telescoping).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exactnum import ExactReal, ExactValue, exact_lt, simplify

Poly = tuple[Fraction, ...]


def poly_from(coeffs: Sequence) -> Poly:
    return tuple(Fraction(c) for c in coeffs)


def poly_trim(poly: Poly) -> Poly:
    i = 0
    while i < len(poly) - 1 and poly[i] == 0:
        i += 1
    return tuple(poly[i:])


def poly_degree(poly: Poly) -> int:
    return len(poly_trim(poly)) - 1


def poly_eval(poly: Poly, x: ExactValue) -> ExactValue:
    acc: ExactValue = Fraction(0)
    for c in poly:
        acc = acc * x + c
    return simplify(acc)


def poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    p = (Fraction(0),) * (n - len(p)) + tuple(p)
    q = (Fraction(0),) * (n - len(q)) + tuple(q)
    return poly_trim(tuple(a + b for a, b in zip(p, q)))


def poly_scale(poly: Poly, k: Fraction) -> Poly:
    return tuple(c * k for c in poly)


def poly_mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly_trim(tuple(out))


def poly_derivative(poly: Poly) -> Poly:
    n = len(poly) - 1
    if n == 0:
        return (Fraction(0),)
    return tuple(c * (n - i) for i, c in enumerate(poly[:-1]))


def poly_antiderivative(poly: Poly) -> Poly:
    n = len(poly)
    return tuple(c / (n - i) for i, c in enumerate(poly)) + (Fraction(0),)


def poly_integrate(poly: Poly, lo: Fraction, hi: Fraction) -> Fraction:
    anti = poly_antiderivative(poly)
    return poly_eval(anti, hi) - poly_eval(anti, lo)


# Power sums T_k(n) = sum_{v=0}^{n} v**k as polynomials in n.  The telescoping
# identity T_k(n) - T_k(n-1) = n**k holds for every integer n, so the range
# sum below is valid for negative bounds too.
def _power_sum(k: int, n: int) -> Fraction:
    if k == 0:
        return Fraction(n + 1)
    if k == 1:
        return Fraction(n * (n + 1), 2)
    if k == 2:
        return Fraction(n * (n + 1) * (2 * n + 1), 6)
    if k == 3:
        return Fraction(n * (n + 1), 2) ** 2
    raise ValueError("power sums implemented up to cubic")


def poly_int_range_sum(poly: Poly, lo: int, hi: int) -> Fraction:
    """Exact sum of poly(v) over integers lo..hi inclusive."""
    if hi < lo:
        return Fraction(0)
    total = Fraction(0)
    deg = len(poly) - 1
    for i, c in enumerate(poly):
        if c == 0:
            continue
        k = deg - i
        total += c * (_power_sum(k, hi) - _power_sum(k, lo - 1))
    return total


def poly_real_roots(poly: Poly) -> list[ExactValue]:
    """Real roots of a polynomial of degree <= 2, ascending, in closed form."""
    p = poly_trim(poly)
    deg = len(p) - 1
    if deg == 0:
        return []
    if deg == 1:
        a, b = p
        return [-b / a]
    if deg == 2:
        a, b, c = p
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        if disc == 0:
            return [-b / (2 * a)]
        root = ExactReal.sqrt(disc)
        half = Fraction(1, 2 * a)
        r1 = simplify((-b - root) * half)
        r2 = simplify((-b + root) * half)
        return [r1, r2] if exact_lt(r1, r2) else [r2, r1]
    raise ValueError("closed-form roots implemented up to degree 2")


def poly_min_on_interval(poly: Poly, lo: Fraction, hi: Fraction) -> ExactValue:
    """Exact minimum of poly (degree <= 3) over the closed interval [lo, hi]."""
    if hi < lo:
        raise ValueError("empty interval")
    candidates: list[ExactValue] = [Fraction(lo), Fraction(hi)]
    for root in poly_real_roots(poly_derivative(poly)):
        if exact_lt(lo, root) and exact_lt(root, hi):
            candidates.append(root)
    best = poly_eval(poly, candidates[0])
    for cand in candidates[1:]:
        val = poly_eval(poly, cand)
        if exact_lt(val, best):
            best = val
    return best
