"""Global feature-redundancy queries.

A feature is redundant when changing it alone can never change any
prediction.  Two exact decision paths:

  * Continuous smooth models (real-interval domains, spline components):
    if the model is trivial (the additive sum never crosses the boundary)
    every feature is redundant.  Otherwise a feature is redundant exactly
    when its weighted component is constant over its domain: a constant
    contribution can never move the sum, while a non-constant one can be
    combined with a rest-assignment near the boundary to flip the label
    (the rest-sum sweeps a full interval by continuity).  Witnesses are
    found by exact rational line search near the boundary and verified by
    evaluation.

  * Enumerable (or losslessly quantized) models: a feature is non-redundant
    exactly when some achievable rest-sum s satisfies s + m < 0 <= s + M,
    where m and M are the extremes of the feature's integer table; the
    achievable sums come from the same counting DP that serves completion
    counting, and witnesses are reconstructed by DP traceback.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .counting import QuantizedModel, quantize, quantize_lossless, reachable_sums
from .errors import PrecisionError, UnsupportedTaskError, ValidationError
from .exactnum import ExactValue, as_fraction_or_none, exact_add, exact_lt, exact_sign
from .model import (
    Enumerable,
    GamModel,
    Instance,
    RealInterval,
    SplineShape,
    Task,
    evaluate,
)
from .piecewise import (
    PiecewiseFunction,
    canonicalize,
    extremes,
    rational_point_above,
    rational_point_below,
)


@dataclass(frozen=True)
class RedundancyWitness:
    """Instance (with the feature at v1) whose label flips at v2."""

    instance: Instance
    v1: Fraction
    v2: Fraction


@dataclass(frozen=True)
class RedundancyResult:
    redundant: bool
    witness: Optional[RedundancyWitness]


def is_redundant_continuous(model: GamModel, index: int) -> RedundancyResult:
    """Polynomial-time redundancy test for continuous smooth classifiers."""
    if model.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError("redundancy is a classification query")
    for i, (comp, domain) in enumerate(zip(model.components, model.domains), start=1):
        if not isinstance(domain, RealInterval):
            raise ValidationError(
                f"feature {i}: the continuous fast path needs real-interval domains"
            )
        if not isinstance(comp.shape, SplineShape):
            raise ValidationError(
                f"feature {i}: the continuous fast path needs spline components"
            )
    if not 1 <= index <= model.k:
        raise ValidationError(f"feature index {index} out of range 1..{model.k}")
    pws = [canonicalize(model.component(i), model.domain(i)) for i in range(1, model.k + 1)]
    exts = [extremes(pw, d) for pw, d in zip(pws, model.domains)]

    global_lo: ExactValue = model.beta0
    global_hi: ExactValue = model.beta0
    for ext in exts:
        global_lo = exact_add(global_lo, ext.minimum)
        global_hi = exact_add(global_hi, ext.maximum)
    if exact_sign(global_lo) >= 0 or exact_sign(global_hi) < 0:
        return RedundancyResult(True, None)  # trivial model: one label everywhere

    ext_i = exts[index - 1]
    if ext_i.minimum == ext_i.maximum:
        return RedundancyResult(True, None)  # constant contribution
    witness = _continuous_witness(model, index, pws, exts)
    return RedundancyResult(False, witness)


def _rational_strictly_between(a: ExactValue, b: ExactValue) -> Fraction:
    """A rational in the open interval (a, b); exists since a < b."""
    fa = as_fraction_or_none(a)
    fb = as_fraction_or_none(b)
    if fa is not None and fb is not None:
        return (fa + fb) / 2
    bits = 4
    while bits <= 4096:
        # dyadic sweep: some multiple of 2**-bits eventually lands inside
        approx = (float(a) + float(b)) / 2
        base = Fraction(round(approx * (1 << bits)), 1 << bits)
        for cand in (base, base - Fraction(1, 1 << bits), base + Fraction(1, 1 << bits)):
            if exact_lt(a, cand) and exact_lt(cand, b):
                return cand
        bits *= 2
    raise ArithmeticError("no rational found in a nonempty open interval")


def _rational_margin(*positives: ExactValue) -> Fraction:
    """A positive rational strictly below each of the (positive) arguments."""
    gamma = Fraction(1)
    while not all(exact_lt(gamma, p) for p in positives):
        gamma /= 2
        if gamma < Fraction(1, 2**4096):
            raise ArithmeticError("margin refinement failed")
    return gamma


def _hit_value(
    pw: PiecewiseFunction, lo_pt: Fraction, hi_pt: Fraction, target: Fraction, tol: Fraction
) -> tuple[Fraction, Fraction]:
    """A rational point between two anchors whose value is within tol of target.

    The anchor values straddle the target; bisection converges because the
    function is continuous on the bracket.
    """
    p, q = lo_pt, hi_pt
    vp, vq = pw.evaluate(p), pw.evaluate(q)
    if exact_lt(target, vp):
        p, q, vp, vq = q, p, vq, vp  # ensure value(p) <= target <= value(q)
    for _ in range(20000):
        if abs(vp - target) <= tol:
            return p, vp
        if abs(vq - target) <= tol:
            return q, vq
        mid = (p + q) / 2
        vm = pw.evaluate(mid)
        if vm <= target:
            p, vp = mid, vm
        else:
            q, vq = mid, vm
    raise ArithmeticError("bisection toward a component value did not converge")


def _continuous_witness(model, index, pws, exts) -> Optional[RedundancyWitness]:
    rest = [j for j in range(1, model.k + 1) if j != index]
    ext_i = exts[index - 1]
    m_i, big_m_i = ext_i.minimum, ext_i.maximum

    rest_lo: ExactValue = model.beta0
    rest_hi: ExactValue = model.beta0
    for j in rest:
        rest_lo = exact_add(rest_lo, exts[j - 1].minimum)
        rest_hi = exact_add(rest_hi, exts[j - 1].maximum)

    varying = [j for j in rest if exts[j - 1].minimum != exts[j - 1].maximum]
    if not varying:
        # the rest-sum is forced: constants plus the intercept
        assignment = {j: model.domain(j).lo for j in rest}
        s_actual = model.beta0
        for j in rest:
            s_actual += pws[j - 1].evaluate(model.domain(j).lo)
        return _feature_flip(model, index, pws[index - 1], assignment, s_actual, ext_i)

    # rest-sums form the full interval [rest_lo, rest_hi]; aim for a rational
    # target strictly inside the flip window (-M_i, -m_i) intersected with it
    window_lo = rest_lo if exact_lt(-big_m_i, rest_lo) else -big_m_i
    window_hi = rest_hi if exact_lt(rest_hi, -m_i) else -m_i
    if not exact_lt(window_lo, window_hi):
        return None  # boundary-exact corner: no rational witness reachable here
    s_target = _rational_strictly_between(window_lo, window_hi)
    gamma = _rational_margin(
        exact_add(s_target, -window_lo), exact_add(window_hi, -s_target)
    )
    m = len(rest)
    delta = gamma / (4 * m)

    anchors: dict[int, tuple[Fraction, Fraction, Fraction, Fraction]] = {}
    for j in rest:
        pw, dom, ext = pws[j - 1], model.domain(j), exts[j - 1]
        if ext.minimum == ext.maximum:
            pt = dom.lo  # constant contribution: any point works
            val = pw.evaluate(pt)
            anchors[j] = (pt, val, pt, val)
            continue
        u = rational_point_below(pw, dom, exact_add(ext.minimum, delta))
        w = rational_point_above(pw, dom, exact_add(ext.maximum, -delta))
        if u is None or w is None:
            return None
        anchors[j] = (u, pw.evaluate(u), w, pw.evaluate(w))

    # exact water-filling over the achieved anchor values
    alphas = {j: anchors[j][1] for j in rest}
    betas = {j: anchors[j][3] for j in rest}
    target_rest = s_target - model.beta0
    excess = target_rest - sum(alphas.values())
    if excess < 0 or excess > sum(betas[j] - alphas[j] for j in rest):
        return None  # anchors too loose; cannot happen with the chosen margins
    targets: dict[int, Fraction] = {}
    for j in rest:
        take = min(excess, betas[j] - alphas[j])
        targets[j] = alphas[j] + take
        excess -= take

    assignment: dict[int, Fraction] = {}
    achieved = model.beta0
    for j in rest:
        u, a_val, w, b_val = anchors[j]
        if targets[j] == a_val:
            assignment[j], val = u, a_val
        elif targets[j] == b_val:
            assignment[j], val = w, b_val
        else:
            assignment[j], val = _hit_value(pws[j - 1], u, w, targets[j], delta)
        achieved += val
    return _feature_flip(model, index, pws[index - 1], assignment, achieved, ext_i)


def _feature_flip(model, index, pw_i, assignment, s_actual, ext_i) -> Optional[RedundancyWitness]:
    """Choose v1 (label 0) and v2 (label 1) for the feature given the rest-sum."""
    dom_i = model.domain(index)
    v1 = rational_point_below(pw_i, dom_i, -s_actual)
    v2 = rational_point_above(pw_i, dom_i, -s_actual)
    if v2 is None:
        # the maximum may sit exactly on the boundary; only an exact rational
        # maximizer can serve then
        arg = as_fraction_or_none(ext_i.argmax)
        if arg is not None and not exact_lt(exact_add(pw_i.evaluate(arg), s_actual), 0):
            v2 = arg
    if v1 is None or v2 is None:
        return None
    values = [assignment.get(j, None) for j in range(1, model.k + 1)]
    values[index - 1] = v1
    instance = Instance(tuple(values))
    flipped = instance.replace(index, v2)
    if evaluate(model, instance) == evaluate(model, flipped):
        return None
    return RedundancyWitness(instance, v1, v2)


def is_redundant_discrete(
    model: GamModel, index: int, digits: Optional[int] = None
) -> RedundancyResult:
    """Exact redundancy over enumerable domains via the reachable-sum DP.

    With digits=None the model is quantized at its lossless scale, so the
    answer is always exact; a fixed-digit quantization that loses precision
    raises PrecisionError instead of guessing.
    """
    if model.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError("redundancy is a classification query")
    for i, domain in enumerate(model.domains, start=1):
        if not isinstance(domain, Enumerable):
            raise ValidationError(
                f"feature {i}: the discrete path needs enumerable domains "
                "(discretize or quantize first)"
            )
    if not 1 <= index <= model.k:
        raise ValidationError(f"feature index {index} out of range 1..{model.k}")
    if digits is None:
        q = quantize_lossless(model)
    else:
        q = quantize(model, digits)
        if not q.lossless:
            raise PrecisionError(
                "quantization at %d digits is lossy (max error %s/%s); redundancy "
                "needs exact tables" % (digits, q.max_abs_error, q.scale)
            )
    return _discrete_decision(q, index)


def _discrete_decision(q: QuantizedModel, index: int) -> RedundancyResult:
    row = q.tables[index - 1]
    m_i, big_m_i = min(row), max(row)
    if m_i == big_m_i:
        return RedundancyResult(True, None)
    reach = reachable_sums(q, exclude=(index,))
    # non-redundant iff some achievable rest-sum s has s + m_i < 0 <= s + M_i
    mask = reach.table.final
    lo_idx = max(-big_m_i - reach.offset, 0)
    hi_idx = min(-m_i - reach.offset, len(mask))
    hit = None
    if lo_idx < hi_idx:
        window = mask[lo_idx:hi_idx]
        pos = int(window.argmax())
        if window[pos]:
            hit = reach.offset + lo_idx + pos
    if hit is None:
        return RedundancyResult(True, None)
    assignment = reach.witness(hit)
    values_i = q.domains[index - 1].values
    v1 = values_i[row.index(m_i)]
    v2 = values_i[row.index(big_m_i)]
    values = [assignment.get(j) for j in range(1, q.k + 1)]
    values[index - 1] = v1
    instance = Instance(tuple(values))
    return RedundancyResult(False, RedundancyWitness(instance, v1, v2))
