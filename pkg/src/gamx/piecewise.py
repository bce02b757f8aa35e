"""Canonical 1-D piecewise-polynomial analysis for model components.

Every component becomes a PiecewiseFunction for its weighted value
beta_i * f_i over the convex hull of the feature's domain:

  * splines are already in this form (clipped to the hull and scaled);
  * tree ensembles decompose into constant cells between their thresholds;
  * ReLU networks are propagated layer by layer as piecewise-linear
    functions, splitting pieces at each ReLU zero crossing.

Extrema over real intervals come from piece endpoints plus the exact roots
of each piece's derivative (degree <= 2, closed form, possibly quadratic
surds).  Over integer ranges every critical point is snapped to its floor
and ceiling.  Expectations integrate or sum exactly against the supported
marginals.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .distributions import (
    Categorical,
    Marginal,
    PiecewiseDensity,
    UniformInt,
    UniformReal,
)
from .errors import BudgetExceededError, DomainError, UnsupportedDistributionError
from .exactnum import ExactValue, exact_le, exact_lt
from .model import (
    Component,
    Enumerable,
    FeatureDomain,
    IntegerRange,
    MlpShape,
    RealInterval,
    SplineShape,
    TreeEnsembleShape,
    domain_hull,
    eval_ensemble,
    eval_shape,
)
from .polyops import (
    Poly,
    poly_derivative,
    poly_eval,
    poly_int_range_sum,
    poly_integrate,
    poly_mul,
    poly_real_roots,
    poly_scale,
    poly_trim,
)

DEFAULT_PIECE_BUDGET = 100_000


@dataclass(frozen=True)
class PiecewiseFunction:
    """Breakpoints t_0 < ... < t_m with one polynomial per [t_j, t_{j+1}).

    The final piece is closed at t_m, mirroring the spline convention.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[Poly, ...]

    def piece_index(self, x) -> int:
        bps = self.breakpoints
        if isinstance(x, Fraction):
            if x < bps[0] or x > bps[-1]:
                raise DomainError(f"{x} outside piecewise support [{bps[0]}, {bps[-1]}]")
            j = bisect_right(bps, x) - 1
        else:  # exact algebraic point
            if exact_lt(x, bps[0]) or exact_lt(bps[-1], x):
                raise DomainError("point outside piecewise support")
            j = 0
            while j + 1 < len(bps) and exact_le(bps[j + 1], x):
                j += 1
        return min(j, len(self.pieces) - 1)

    def evaluate(self, x) -> ExactValue:
        return poly_eval(self.pieces[self.piece_index(x)], x)


@dataclass(frozen=True)
class Extremes:
    """Exact min/max with witnesses that attain them.

    Values and witnesses are rational whenever possible but may be quadratic
    surds when a cubic's interior critical point is irrational.
    """

    minimum: ExactValue
    argmin: ExactValue
    maximum: ExactValue
    argmax: ExactValue


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------


def canonicalize(
    component: Component,
    domain: FeatureDomain,
    budget: int = DEFAULT_PIECE_BUDGET,
) -> PiecewiseFunction:
    """Exact piecewise form of beta * f over the domain hull.

    Only the ReLU-network path can exceed the piece budget (piece counts can
    grow exponentially with depth); it fails loudly with the count reached
    rather than truncating.
    """
    if isinstance(domain, Enumerable):
        raise DomainError("canonicalize is for interval domains; use component_values")
    if budget < 1:
        raise ValueError("piece budget must be >= 1")
    lo, hi = domain_hull(domain)
    if lo == hi:
        value = component.beta * eval_shape(component.shape, lo)
        return PiecewiseFunction((lo, lo + 1), ((value,),))
    shape = component.shape
    if isinstance(shape, SplineShape):
        return _canonical_spline(shape, component.beta, lo, hi)
    if isinstance(shape, TreeEnsembleShape):
        return _canonical_ensemble(shape, component.beta, lo, hi)
    return _canonical_mlp(shape, component.beta, lo, hi, budget)


def _canonical_spline(shape: SplineShape, beta: Fraction, lo, hi) -> PiecewiseFunction:
    bps: list[Fraction] = [lo]
    pieces: list[Poly] = []
    for j, poly in enumerate(shape.polys):
        start = max(shape.knots[j], lo)
        end = min(shape.knots[j + 1], hi)
        if start >= end:
            continue
        pieces.append(poly_trim(poly_scale(poly, beta)))
        bps.append(end)
    return _merged(bps, pieces)


def _tree_thresholds(shape: TreeEnsembleShape) -> list[Fraction]:
    found: set[Fraction] = set()

    def walk(node):
        if hasattr(node, "threshold"):
            found.add(node.threshold)
            walk(node.yes)
            walk(node.no)

    for tree in shape.trees:
        walk(tree)
    return sorted(found)


def _canonical_ensemble(shape: TreeEnsembleShape, beta: Fraction, lo, hi) -> PiecewiseFunction:
    # A threshold at exactly hi still flips the value at the closed endpoint,
    # so keep it as a cut and pad the support one unit past hi.
    cuts = [t for t in _tree_thresholds(shape) if lo < t <= hi]
    bps = [lo, *cuts]
    bps.append(hi if bps[-1] < hi else hi + 1)
    # splits test x >= r, so each cell [t_j, t_{j+1}) is constant and its
    # value is attained at the left endpoint
    pieces: list[Poly] = [
        (beta * eval_ensemble(shape, bps[j]),) for j in range(len(bps) - 1)
    ]
    return _merged(bps, pieces)


def _canonical_mlp(shape: MlpShape, beta: Fraction, lo, hi, budget: int) -> PiecewiseFunction:
    # state: piecewise-linear vector function as (slope, intercept) per neuron
    bps: list[Fraction] = [lo, hi]
    affines: list[list[tuple[Fraction, Fraction]]] = [[(Fraction(1), Fraction(0))]]
    last = len(shape.layers) - 1
    for li, (weights, bias) in enumerate(shape.layers):
        out_width = len(bias)
        next_affines = []
        for piece in affines:
            new_piece = []
            for o in range(out_width):
                slope = sum((piece[i][0] * weights[i][o] for i in range(len(piece))), Fraction(0))
                inter = sum((piece[i][1] * weights[i][o] for i in range(len(piece))), bias[o])
                new_piece.append((slope, inter))
            next_affines.append(new_piece)
        affines = next_affines
        if li == last:
            break  # identity output activation
        bps, affines = _apply_relu(bps, affines, budget)
    polys = []
    for slope, inter in (piece[0] for piece in affines):
        slope, inter = beta * slope, beta * inter
        polys.append((slope, inter) if slope != 0 else (inter,))
    return _merged(bps, polys)


def _apply_relu(bps, affines, budget):
    new_bps = [bps[0]]
    new_affines = []
    for j, piece in enumerate(affines):
        p, q = bps[j], bps[j + 1]
        cuts = set()
        for slope, inter in piece:
            if slope != 0:
                root = -inter / slope
                if p < root < q:
                    cuts.add(root)
        local = [p, *sorted(cuts), q]
        for a, b in zip(local, local[1:]):
            mid = (a + b) / 2
            clamped = []
            for slope, inter in piece:
                if slope * mid + inter >= 0:
                    clamped.append((slope, inter))
                else:
                    clamped.append((Fraction(0), Fraction(0)))
            new_affines.append(clamped)
            new_bps.append(b)
        if len(new_affines) > budget:
            raise BudgetExceededError(
                f"piecewise-linear propagation reached {len(new_affines)} pieces "
                f"(budget {budget}); discretize the domain or use the oracle",
                pieces=len(new_affines),
            )
    # merge adjacent pieces whose affine vectors agree
    merged_bps = [new_bps[0]]
    merged_affines: list = []
    for j, piece in enumerate(new_affines):
        if merged_affines and merged_affines[-1] == piece:
            merged_bps[-1] = new_bps[j + 1]
        else:
            merged_affines.append(piece)
            merged_bps.append(new_bps[j + 1])
    return merged_bps, merged_affines


def _merged(bps: list, pieces: list) -> PiecewiseFunction:
    out_bps = [bps[0]]
    out_pieces: list[Poly] = []
    for j, poly in enumerate(pieces):
        if out_pieces and out_pieces[-1] == poly:
            out_bps[-1] = bps[j + 1]
        else:
            out_pieces.append(poly)
            out_bps.append(bps[j + 1])
    return PiecewiseFunction(tuple(out_bps), tuple(out_pieces))


# ---------------------------------------------------------------------------
# Extremes
# ---------------------------------------------------------------------------


def _real_candidates(pw: PiecewiseFunction, lo: Fraction, hi: Fraction) -> list[ExactValue]:
    """Candidate extremum points over [lo, hi]: clipped piece endpoints plus
    interior derivative roots."""
    cands: list[ExactValue] = []
    for j, poly in enumerate(pw.pieces):
        a, b = pw.breakpoints[j], pw.breakpoints[j + 1]
        start = max(a, lo)
        end = min(b, hi)
        if start > end:
            continue
        cands.append(start)
        for root in poly_real_roots(poly_derivative(poly)):
            if exact_lt(start, root) and exact_lt(root, end):
                cands.append(root)
    cands.append(min(hi, pw.breakpoints[-1]))
    return cands


def extremum_candidates(pw: PiecewiseFunction, domain: FeatureDomain) -> list[ExactValue]:
    """The finite point set whose values determine the extrema over the domain.

    Useful for sound discretization: an enumerable grid containing these
    points preserves every per-feature extreme.
    """
    if isinstance(domain, Enumerable):
        return list(domain.values)
    lo, hi = domain_hull(domain)
    if isinstance(domain, RealInterval):
        cands = _real_candidates(pw, lo, hi)
    else:
        cands = []
        for point in _real_candidates(pw, lo, hi):
            if isinstance(point, Fraction) and point.denominator == 1:
                cands.append(point)
            else:
                f = exact_floor_point(point)
                cands.extend([Fraction(f), Fraction(f + 1)])
        cands = [c for c in cands if domain.lo <= c <= domain.hi]
        cands.extend([Fraction(domain.lo), Fraction(domain.hi)])
    seen = []
    for c in cands:
        if not any(c == s for s in seen):
            seen.append(c)
    return seen


def exact_floor_point(point: ExactValue) -> int:
    if isinstance(point, Fraction):
        return point.numerator // point.denominator
    return point.floor()


def extremes(pw: PiecewiseFunction, domain: FeatureDomain) -> Extremes:
    """Exact extrema of pw over the domain, with attaining witnesses.

    Ties are broken toward the smallest witness so certificates are
    deterministic.
    """
    if isinstance(domain, Enumerable):
        points: list[ExactValue] = list(domain.values)
    elif isinstance(domain, RealInterval):
        points = _real_candidates(pw, domain.lo, domain.hi)
    else:
        points = extremum_candidates(pw, domain)
    best_min = best_max = None
    arg_min = arg_max = None
    for point in points:
        value = pw.evaluate(point)
        if best_min is None or exact_lt(value, best_min):
            best_min, arg_min = value, point
        if best_max is None or exact_lt(best_max, value):
            best_max, arg_max = value, point
    return Extremes(best_min, arg_min, best_max, arg_max)


# ---------------------------------------------------------------------------
# Enumerable scan and expectations
# ---------------------------------------------------------------------------


def component_values(component: Component, domain: Enumerable) -> list[tuple[Fraction, Fraction]]:
    """Exact (value, beta * f(value)) pairs in domain order."""
    return list(_component_values_cached(component, domain))


@lru_cache(maxsize=4096)
def _component_values_cached(component: Component, domain: Enumerable):
    # components and domains are immutable, so the scan is safe to share
    if not isinstance(domain, Enumerable):
        raise DomainError("component_values requires an enumerable domain")
    beta = component.beta
    if beta == 0:
        return tuple((v, Fraction(0)) for v in domain.values)
    shape = component.shape
    return tuple((v, beta * eval_shape(shape, v)) for v in domain.values)


def expectation(component: Component, domain: FeatureDomain, marginal: Marginal) -> Fraction:
    """Exact expected weighted component value under the marginal.

    Enumerable domains use the probability-weighted value scan; uniform
    integer ranges use closed-form power sums; real intervals integrate the
    piecewise polynomial against the (uniform or piecewise-polynomial)
    density.  Degree <= 3 polynomials against rational densities always
    integrate to rationals, so the result is exact.
    """
    if isinstance(domain, Enumerable):
        if not isinstance(marginal, Categorical):
            raise UnsupportedDistributionError(
                "enumerable domains require a categorical marginal"
            )
        pairs = component_values(component, domain)
        return sum((p * w for p, (_, w) in zip(marginal.probs, pairs)), Fraction(0))

    if isinstance(domain, IntegerRange):
        if not isinstance(marginal, UniformInt):
            raise UnsupportedDistributionError(
                "integer ranges support the uniform marginal only"
            )
        pw = canonicalize(component, domain)
        total = Fraction(0)
        for j, poly in enumerate(pw.pieces):
            a, b = pw.breakpoints[j], pw.breakpoints[j + 1]
            m = max(_ceil(a), domain.lo)
            last_piece = j == len(pw.pieces) - 1
            top = _floor(b) if (last_piece or not _is_integer(b)) else _floor(b) - 1
            m_hi = min(top, domain.hi)
            total += poly_int_range_sum(poly, m, m_hi)
        return total / (domain.hi - domain.lo + 1)

    if isinstance(domain, RealInterval):
        lo, hi = domain.lo, domain.hi
        if isinstance(marginal, UniformReal):
            if lo == hi:
                comp_pw = canonicalize(component, domain)
                return _as_fraction(comp_pw.evaluate(lo))
            pw = canonicalize(component, domain)
            total = Fraction(0)
            for j, poly in enumerate(pw.pieces):
                a = max(pw.breakpoints[j], lo)
                b = min(pw.breakpoints[j + 1], hi)
                if a < b:
                    total += poly_integrate(poly, a, b)
            return total / (hi - lo)
        if isinstance(marginal, PiecewiseDensity):
            pw = canonicalize(component, domain)
            cuts = sorted(
                {lo, hi}
                | {t for t in pw.breakpoints if lo < t < hi}
                | {t for t in marginal.breakpoints if lo < t < hi}
            )
            density = PiecewiseFunction(marginal.breakpoints, marginal.polys)
            total = Fraction(0)
            for a, b in zip(cuts, cuts[1:]):
                mid = (a + b) / 2
                prod = poly_mul(pw.pieces[pw.piece_index(mid)],
                               density.pieces[density.piece_index(mid)])
                total += poly_integrate(prod, a, b)
            return total
        raise UnsupportedDistributionError(
            "real intervals support uniform or piecewise-polynomial densities"
        )
    raise UnsupportedDistributionError(f"unknown domain {type(domain).__name__}")


# ---------------------------------------------------------------------------
# Rational refinement toward irrational extrema
# ---------------------------------------------------------------------------


def rational_point_below(
    pw: PiecewiseFunction, domain: FeatureDomain, bound
) -> Fraction | None:
    """An in-domain rational point whose value is strictly below the bound.

    Exists whenever the exact minimum is below the bound: if the minimizer is
    irrational, dyadic neighbors converge to it and the value converges to
    the minimum by continuity of the piece.
    """
    ext = extremes(pw, domain)
    if not exact_lt(ext.minimum, bound):
        return None
    return _refine_toward(pw, domain, ext.argmin, bound, below=True)


def rational_point_above(
    pw: PiecewiseFunction, domain: FeatureDomain, bound
) -> Fraction | None:
    """An in-domain rational point whose value is strictly above the bound."""
    ext = extremes(pw, domain)
    if not exact_lt(bound, ext.maximum):
        return None
    return _refine_toward(pw, domain, ext.argmax, bound, below=False)


def _refine_toward(pw, domain, witness, bound, below: bool) -> Fraction | None:
    from .exactnum import as_fraction_or_none

    frac = as_fraction_or_none(witness)
    if frac is not None:
        return frac  # the witness value is the extreme itself, past the bound
    lo, hi = domain_hull(domain)
    bits = 8
    while bits <= 4096:
        scaled = witness * (1 << bits)
        base = Fraction(scaled.floor(), 1 << bits)
        for cand in (base, base + Fraction(1, 1 << bits)):
            if cand < lo or cand > hi:
                continue
            val = pw.evaluate(cand)
            if exact_lt(val, bound) if below else exact_lt(bound, val):
                return cand
        bits *= 2
    return None


def _is_integer(q: Fraction) -> bool:
    return q.denominator == 1


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _as_fraction(v: ExactValue) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return v.as_fraction()
