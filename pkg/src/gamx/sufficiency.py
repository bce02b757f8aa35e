"""Sufficient and contrastive reason queries for classification models.

The engine rests on one observation: with independent per-feature domains,
the completion of a fixed feature set that pushes the additive sum furthest
toward the opposite label assigns every free feature its flip-direction
extreme (its "penalty").  A set is sufficient exactly when that worst-case
sum still lands on the original label; greedy accumulation of features by
descending score (how much fixing the feature beats its penalty) yields
cardinally minimal sufficient and contrastive sets.

step(0) = 1 everywhere: the worst-case test is phrased as step-equality of
exact rational (or quadratic-surd) sums, never as a sign product, so the
boundary case is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Optional, Sequence

from .errors import NoContrastiveReasonError, UnsupportedTaskError
from .exactnum import (
    ExactValue,
    as_fraction_or_none,
    exact_add,
    exact_lt,
    exact_sign,
)
from .model import (
    Enumerable,
    FeatureSubset,
    GamModel,
    Instance,
    IntegerRange,
    RealInterval,
    Task,
    evaluate,
    evaluate_component,
    make_subset,
    presum,
    step,
    validate_instance,
)
from .piecewise import (
    DEFAULT_PIECE_BUDGET,
    PiecewiseFunction,
    canonicalize,
    component_values,
    extremes,
)


class ReasonKind(Enum):
    SUFFICIENT = "sufficient"
    CONTRASTIVE = "contrastive"


@dataclass(frozen=True)
class FeatureScore:
    """Per-feature worst-case bookkeeping at an instance.

    penalty is the extreme of the weighted component over the feature's
    domain in the prediction-flipping direction (minimum when the pre-step
    sum is >= 0, maximum otherwise); score = (fixed - penalty) oriented so it
    is always >= 0.
    """

    index: int
    fixed_value: Fraction
    penalty: ExactValue
    score: ExactValue


@dataclass(frozen=True)
class ReasonCertificate:
    subset: FeatureSubset
    kind: ReasonKind
    witness: Optional[Instance]


@dataclass(frozen=True)
class SufficiencyCheck:
    sufficient: bool
    witness: Optional[Instance]


@dataclass(frozen=True)
class _FeatureAnalysis:
    score: FeatureScore
    penalty_witness: ExactValue      # in-domain point attaining the penalty
    pw: Optional[PiecewiseFunction]  # set for interval domains only


def _step_of(value: ExactValue) -> int:
    return 1 if exact_sign(value) >= 0 else 0


def _analyze(model: GamModel, x: Instance, budget: int) -> tuple[int, list[_FeatureAnalysis]]:
    if model.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError(
            "sufficiency and contrastive queries are defined for classification "
            "models; use the Shapley attribution path for regression"
        )
    validate_instance(model, x)
    base = presum(model, x)
    label = step(base)
    out: list[_FeatureAnalysis] = []
    for i in range(1, model.k + 1):
        comp = model.component(i)
        domain = model.domain(i)
        fixed = evaluate_component(model, i, x.value(i))
        pw = None
        if isinstance(domain, Enumerable):
            pairs = component_values(comp, domain)
            if label == 1:
                penalty, witness = min(((w, v) for v, w in pairs), key=lambda t: t[0])
            else:
                best = max(w for _, w in pairs)
                witness = next(v for v, w in pairs if w == best)
                penalty = best
        else:
            pw = canonicalize(comp, domain, budget)
            ext = extremes(pw, domain)
            if label == 1:
                penalty, witness = ext.minimum, ext.argmin
            else:
                penalty, witness = ext.maximum, ext.argmax
        raw = exact_add(fixed, -penalty)
        score = raw if label == 1 else -raw
        out.append(
            _FeatureAnalysis(FeatureScore(i, fixed, penalty, score), witness, pw)
        )
    return label, out


def feature_scores(
    model: GamModel, x: Instance, budget: int = DEFAULT_PIECE_BUDGET
) -> list[FeatureScore]:
    """One penalty/score entry per feature, in feature order."""
    _, analyses = _analyze(model, x, budget)
    return [a.score for a in analyses]


def _sorted_desc(analyses: Sequence[_FeatureAnalysis]) -> list[_FeatureAnalysis]:
    # descending score, ties broken by ascending feature index
    if all(isinstance(a.score.score, Fraction) for a in analyses):
        return sorted(analyses, key=lambda a: (-a.score.score, a.score.index))

    def cmp(a: _FeatureAnalysis, b: _FeatureAnalysis) -> int:
        if exact_lt(b.score.score, a.score.score):
            return -1
        if exact_lt(a.score.score, b.score.score):
            return 1
        return a.score.index - b.score.index

    return sorted(analyses, key=cmp_to_key(cmp))


def _worst_sum(model: GamModel, analyses, subset_indices) -> ExactValue:
    total: ExactValue = model.beta0
    for a in analyses:
        if a.score.index in subset_indices:
            total = exact_add(total, a.score.fixed_value)
        else:
            total = exact_add(total, a.score.penalty)
    return total


def _rational_below(value: ExactValue) -> Fraction:
    """A positive rational strictly below a positive exact value."""
    as_frac = as_fraction_or_none(value)
    if as_frac is not None:
        return as_frac
    gamma = Fraction(1)
    while not exact_lt(gamma, value):
        gamma /= 2
    return gamma


def _flip_witness(
    model: GamModel,
    x: Instance,
    analyses: Sequence[_FeatureAnalysis],
    free_indices: frozenset[int],
    label: int,
    worst: ExactValue,
) -> Optional[Instance]:
    """A rational completion whose prediction differs from the label.

    The worst-case sum already crossed the boundary; free features get their
    penalty witnesses, refined to nearby rationals (within a slack that keeps
    the crossing strict) when a witness is an irrational critical point.
    """
    from .piecewise import rational_point_above, rational_point_below

    free = [a for a in analyses if a.score.index in free_indices]
    margin = -worst if label == 1 else worst
    margin_sign = exact_sign(margin)
    exact_needed = margin_sign == 0
    witness_values: dict[int, Fraction] = {}
    if exact_needed:
        # boundary-exact case: only exact rational witnesses can work
        for a in free:
            frac = as_fraction_or_none(a.penalty_witness)
            if frac is None:
                return None
            witness_values[a.score.index] = frac
    else:
        slack = _rational_below(margin) / (2 * max(len(free), 1))
        for a in free:
            frac = as_fraction_or_none(a.penalty_witness)
            if frac is not None:
                witness_values[a.score.index] = frac
                continue
            domain = model.domain(a.score.index)
            if label == 1:
                found = rational_point_below(a.pw, domain, exact_add(a.score.penalty, slack))
            else:
                found = rational_point_above(a.pw, domain, exact_add(a.score.penalty, -slack))
            if found is None:
                return None
            witness_values[a.score.index] = found
    candidate = x
    for idx, val in witness_values.items():
        candidate = candidate.replace(idx, val)
    if evaluate(model, candidate) == label:
        return None
    return candidate


def check_sufficient(
    model: GamModel,
    x: Instance,
    subset: Iterable[int] | FeatureSubset,
    budget: int = DEFAULT_PIECE_BUDGET,
) -> SufficiencyCheck:
    """Decide whether fixing the subset forces the prediction.

    When it does not, the returned witness is a completion (penalty values on
    the free features) whose prediction provably differs.
    """
    label, analyses = _analyze(model, x, budget)
    sub = subset if isinstance(subset, FeatureSubset) else make_subset(subset, model.k)
    worst = _worst_sum(model, analyses, sub.indices)
    if _step_of(worst) == label:
        return SufficiencyCheck(True, None)
    free = frozenset(range(1, model.k + 1)) - sub.indices
    witness = _flip_witness(model, x, analyses, free, label, worst)
    return SufficiencyCheck(False, witness)


def minimal_sufficient(
    model: GamModel, x: Instance, budget: int = DEFAULT_PIECE_BUDGET
) -> ReasonCertificate:
    """A cardinally minimal sufficient subset (the full set always works)."""
    label, analyses = _analyze(model, x, budget)
    ordered = _sorted_desc(analyses)
    current = _worst_sum(model, analyses, frozenset())
    chosen: list[int] = []
    if _step_of(current) == label:
        return ReasonCertificate(FeatureSubset(frozenset()), ReasonKind.SUFFICIENT, None)
    for a in ordered:
        current = exact_add(current, exact_add(a.score.fixed_value, -a.score.penalty))
        chosen.append(a.score.index)
        if _step_of(current) == label:
            return ReasonCertificate(
                FeatureSubset(frozenset(chosen)), ReasonKind.SUFFICIENT, None
            )
    # full set: worst-case completion is x itself
    return ReasonCertificate(FeatureSubset(frozenset(chosen)), ReasonKind.SUFFICIENT, None)


def minimal_contrastive(
    model: GamModel, x: Instance, budget: int = DEFAULT_PIECE_BUDGET
) -> ReasonCertificate:
    """A cardinally minimal contrastive subset plus a prediction-flip witness."""
    label, analyses = _analyze(model, x, budget)
    ordered = _sorted_desc(analyses)
    current: ExactValue = presum(model, x)
    chosen: list[int] = []
    for a in ordered:
        current = exact_add(current, exact_add(a.score.penalty, -a.score.fixed_value))
        chosen.append(a.score.index)
        if _step_of(current) != label:
            subset = frozenset(chosen)
            witness = _flip_witness(model, x, analyses, subset, label, current)
            return ReasonCertificate(FeatureSubset(subset), ReasonKind.CONTRASTIVE, witness)
    raise NoContrastiveReasonError(
        "the model is constant at this prediction over the whole domain"
    )


def msr_decision(model: GamModel, x: Instance, d: int, budget: int = DEFAULT_PIECE_BUDGET) -> bool:
    """Is there a sufficient reason of size <= d?"""
    if d < 0:
        raise ValueError("d must be >= 0")
    return len(minimal_sufficient(model, x, budget).subset) <= d


def mcr_decision(model: GamModel, x: Instance, d: int, budget: int = DEFAULT_PIECE_BUDGET) -> bool:
    """Is there a contrastive reason of size <= d?"""
    if d < 0:
        raise ValueError("d must be >= 0")
    try:
        return len(minimal_contrastive(model, x, budget).subset) <= d
    except NoContrastiveReasonError:
        return False
