"""Integer quantization and the multi-choice counting dynamic program.

Component value tables are scaled by an integer and rounded half-to-even.
When every scaled value (including the intercept) was already an integer the
result is lossless and all downstream answers are exact; otherwise answers
carry certified error bounds derived from the summed worst-case rounding
error.

The DP counts assignments by accumulated integer weight.  Each feature takes
exactly one value from its table, so the layer update is

    new[C] = sum over table values s of old[C - s]

(one term per choice, never an additional carry-over of old[C]: features are
not optional items).  Negative weights are handled by tracking the running
minimum as an index offset, keeping the arrays dense and non-negative.
Counts can also be weighted by per-value integer multiplicities, which turns
the same DP into an exact probability computation: categorical probabilities
become integer numerators over a per-feature common denominator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm, prod
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    PrecisionError,
    PrecisionWarning,
    QuantizationOverflowError,
    UnsupportedTaskError,
    ValidationError,
)
from .distributions import Categorical, ProductDistribution, categorical_numerators
from .model import Enumerable, FeatureSubset, GamModel, Instance, Task, make_subset
from .piecewise import component_values

INT_CAPACITY = 2**62


@dataclass(frozen=True)
class QuantizedModel:
    """Integer component-value tables with the recorded scale and error.

    Classification decision on the integer side: label 1 iff the table sum
    is >= threshold, where threshold = -round(scale * beta0).  When lossless,
    that is exactly the model's step decision.
    """

    scale: int
    task: Task
    domains: tuple[Enumerable, ...]
    tables: tuple[tuple[int, ...], ...]
    beta0_scaled: int
    max_abs_error: Fraction
    lossless: bool

    @property
    def k(self) -> int:
        return len(self.tables)

    @property
    def threshold(self) -> int:
        return -self.beta0_scaled

    def value_index(self, index: int, v: Fraction) -> int:
        values = self.domains[index - 1].values
        try:
            return values.index(v)
        except ValueError:
            raise DomainError(f"feature {index}: value {v} not in the quantized domain")

    def weight_of(self, index: int, v: Fraction) -> int:
        return self.tables[index - 1][self.value_index(index, v)]


def _round_half_even(q: Fraction) -> int:
    return round(q)


def _build(model: GamModel, scale: int) -> QuantizedModel:
    if scale < 1:
        raise ValidationError("scale must be a positive integer")
    for i, domain in enumerate(model.domains, start=1):
        if not isinstance(domain, Enumerable):
            raise ValidationError(
                f"feature {i}: quantization requires enumerable domains "
                "(discretize the model first)"
            )
    tables = []
    total_err = Fraction(0)
    for i in range(1, model.k + 1):
        pairs = component_values(model.component(i), model.domain(i))
        row = []
        worst = Fraction(0)
        for _, value in pairs:
            scaled = scale * value
            w = _round_half_even(scaled)
            if abs(w) > INT_CAPACITY:
                raise QuantizationOverflowError(
                    f"feature {i}: quantized weight {w} exceeds the integer capacity"
                )
            err = abs(scaled - w)
            worst = max(worst, err)
            row.append(w)
        total_err += worst
        tables.append(tuple(row))
    b0_scaled = scale * model.beta0
    b0 = _round_half_even(b0_scaled)
    if abs(b0) > INT_CAPACITY:
        raise QuantizationOverflowError("intercept exceeds the integer capacity")
    total_err += abs(b0_scaled - b0)
    return QuantizedModel(
        scale=scale,
        task=model.task,
        domains=tuple(model.domains),
        tables=tuple(tables),
        beta0_scaled=b0,
        max_abs_error=total_err,
        lossless=total_err == 0,
    )


def quantize(model: GamModel, digits: int = 6) -> QuantizedModel:
    """Scale by 10**digits and round half-to-even, reporting the error bound."""
    if digits < 0:
        raise ValidationError("digits must be >= 0")
    return _build(model, 10**digits)


def quantize_with_scale(model: GamModel, scale: int) -> QuantizedModel:
    return _build(model, scale)


def lossless_scale(model: GamModel, cap: int = 10**12) -> int:
    """The smallest scale that makes quantization lossless for this model."""
    denoms = [model.beta0.denominator]
    for i in range(1, model.k + 1):
        domain = model.domain(i)
        if not isinstance(domain, Enumerable):
            raise ValidationError(
                f"feature {i}: lossless scaling requires enumerable domains"
            )
        denoms.extend(w.denominator for _, w in component_values(model.component(i), domain))
    scale = lcm(*denoms)
    if scale > cap:
        raise QuantizationOverflowError(
            f"lossless scale {scale} exceeds the cap {cap}; quantize with fixed "
            "digits instead and accept bounded answers"
        )
    return scale


@lru_cache(maxsize=256)
def quantize_lossless(model: GamModel, cap: int = 10**12) -> QuantizedModel:
    return _build(model, lossless_scale(model, cap))


# ---------------------------------------------------------------------------
# The DP core
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReachTable:
    """Layered DP state: layers[j] holds the array after j features.

    Index C - offset stores the count/mass of assignments to the first j
    features whose integer weights sum to C.  offsets[j] is the running
    minimum possible sum.
    """

    offsets: tuple[int, ...]
    layers: tuple[np.ndarray, ...]
    feature_order: tuple[int, ...]

    @property
    def offset(self) -> int:
        return self.offsets[-1]

    @property
    def final(self) -> np.ndarray:
        return self.layers[-1]


def _dp_dtype(bound: int):
    return np.int64 if bound < INT_CAPACITY else object


def _fold(
    entries: Sequence[Sequence[tuple[int, int]]],
    mass_bound: int,
    keep_layers: bool,
) -> tuple[list[int], list[np.ndarray]]:
    """Run the multi-choice DP over (weight, multiplicity) tables."""
    dtype = _dp_dtype(mass_bound)
    cur = np.ones(1, dtype=dtype)
    cur_lo = 0
    offsets = [0]
    layers = [cur]
    for table in entries:
        lo = min(w for w, _ in table)
        hi = max(w for w, _ in table)
        new_lo = cur_lo + lo
        new = np.zeros(len(cur) + (hi - lo), dtype=dtype)
        for w, mult in table:
            start = cur_lo + w - new_lo
            if mult == 1:
                new[start : start + len(cur)] += cur
            elif mult:
                new[start : start + len(cur)] += mult * cur
        cur, cur_lo = new, new_lo
        offsets.append(cur_lo)
        if keep_layers:
            layers.append(cur)
    if not keep_layers:
        layers = [cur]
    return offsets, layers


def _suffix_total(arr: np.ndarray, start_index: int) -> int:
    # int64 arrays only exist when the layer total fits int64, so the native
    # sum cannot overflow; object arrays take the slow exact path
    start_index = max(start_index, 0)
    if start_index >= len(arr):
        return 0
    view = arr[start_index:] if start_index else arr
    if arr.dtype == np.int64:
        return int(view.sum())
    return int(view.sum(dtype=object))


@dataclass(frozen=True)
class BoundedCount:
    """A lossy-quantization answer with a certified enclosure of the truth."""

    value: Fraction
    lower: Fraction
    upper: Fraction


def count_completions(
    q: QuantizedModel,
    x: Instance,
    subset: Iterable[int] | FeatureSubset,
    allow_lossy: bool = False,
):
    """Fraction of free-feature completions that preserve the prediction.

    Exact when the quantization is lossless.  Otherwise a BoundedCount is
    returned (with a PrecisionWarning) whose [lower, upper] interval is
    guaranteed to contain the true fraction; callers must opt in via
    allow_lossy.
    """
    if q.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError("completion counting is a classification query")
    if not q.lossless and not allow_lossy:
        raise PrecisionError(
            "quantization is lossy (max error %s/%s); pass allow_lossy=True for a "
            "bounded answer or re-quantize losslessly" % (q.max_abs_error, q.scale)
        )
    sub = subset if isinstance(subset, FeatureSubset) else make_subset(subset, q.k)
    if len(x.values) != q.k:
        raise DomainError(f"instance has {len(x.values)} values, model expects {q.k}")
    weights_x = [q.weight_of(i, x.value(i)) for i in range(1, q.k + 1)]
    x_sum = sum(weights_x) + q.beta0_scaled
    label = 1 if x_sum >= 0 else 0
    fixed = sum(weights_x[i - 1] for i in sub.indices)
    free = [i for i in range(1, q.k + 1) if i not in sub.indices]
    total = prod(len(q.tables[i - 1]) for i in free)
    if not free:
        return Fraction(1)
    entries = [[(w, 1) for w in q.tables[i - 1]] for i in free]
    offsets, layers = _fold(entries, total, keep_layers=False)
    final, offset = layers[-1], offsets[-1]
    base = q.beta0_scaled + fixed
    ones = _suffix_total(final, -base - offset)
    matching = ones if label == 1 else total - ones
    value = Fraction(matching, total)
    if q.lossless:
        return value
    err = q.max_abs_error
    # certain-1: sum + b0 >= err even under the worst rounding; possible-1:
    # sum + b0 >= -err.  Integer sums make the comparisons exact ceilings.
    certain = _suffix_total(final, _ceil_frac(err) - base - offset)
    possible = _suffix_total(final, _ceil_frac(-err) - base - offset)
    p_lo, p_hi = Fraction(certain, total), Fraction(possible, total)
    if -err <= x_sum < err:
        # the anchor label itself is uncertain: envelope both interpretations
        lo = min(p_lo, 1 - p_hi)
        hi = max(p_hi, 1 - p_lo)
    elif label == 1:
        lo, hi = p_lo, p_hi
    else:
        lo, hi = 1 - p_hi, 1 - p_lo
    warnings.warn(
        PrecisionWarning(
            f"lossy quantization: true completion count within [{lo}, {hi}]"
        )
    )
    return BoundedCount(value, lo, hi)


def _ceil_frac(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def expected_label(q: QuantizedModel, dist: ProductDistribution) -> Fraction:
    """Exact Pr[label = 1] under a per-feature categorical distribution."""
    if q.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError("expected label is a classification query")
    if not q.lossless:
        raise PrecisionError("expected_label requires lossless quantization")
    if len(dist.marginals) != q.k:
        raise ValidationError("distribution does not match the model")
    entries = []
    denom = 1
    for i in range(1, q.k + 1):
        marg = dist.marginal(i)
        if not isinstance(marg, Categorical):
            raise ValidationError(
                f"feature {i}: expected_label requires categorical marginals"
            )
        nums, den = categorical_numerators(marg)
        if len(nums) != len(q.tables[i - 1]):
            raise ValidationError(f"feature {i}: marginal does not match the domain")
        denom *= den
        entries.append(list(zip(q.tables[i - 1], nums)))
    offsets, layers = _fold(entries, denom, keep_layers=False)
    mass = _suffix_total(layers[-1], q.threshold - offsets[-1])
    return Fraction(mass, denom)


@dataclass(frozen=True)
class ReachableSums:
    """Achievable integer sums (tables plus scaled intercept) with traceback."""

    q: QuantizedModel
    table: ReachTable

    @property
    def offset(self) -> int:
        return self.table.offset

    def contains(self, total: int) -> bool:
        idx = total - self.offset
        return 0 <= idx < len(self.table.final) and bool(self.table.final[idx])

    def as_set(self) -> set[int]:
        final = self.table.final
        return {self.offset + i for i in range(len(final)) if final[i]}

    def witness(self, total: int) -> dict[int, Fraction]:
        """A per-feature assignment achieving the requested sum."""
        if not self.contains(total):
            raise ValueError(f"sum {total} is not reachable")
        assignment: dict[int, Fraction] = {}
        remaining = total
        for pos in range(len(self.table.feature_order) - 1, -1, -1):
            i = self.table.feature_order[pos]
            prev = self.table.layers[pos]
            prev_off = self.table.offsets[pos]
            values = self.q.domains[i - 1].values
            row = self.q.tables[i - 1]
            for v, w in zip(values, row):
                idx = remaining - w - prev_off
                if 0 <= idx < len(prev) and prev[idx]:
                    assignment[i] = v
                    remaining -= w
                    break
            else:
                raise AssertionError("traceback failed on a reachable sum")
        return assignment


def reachable_sums(
    q: QuantizedModel, exclude: Iterable[int] | FeatureSubset = ()
) -> ReachableSums:
    """Exact achievability of every integer sum over the non-excluded features.

    The scaled intercept participates as a constant shift, so excluding every
    feature leaves the singleton {round(scale * beta0)}.
    """
    if not q.lossless:
        raise PrecisionError("reachable_sums requires lossless quantization")
    excl = exclude if isinstance(exclude, FeatureSubset) else make_subset(exclude, q.k)
    order = [i for i in range(1, q.k + 1) if i not in excl.indices]
    offsets = [q.beta0_scaled]
    layers = [np.ones(1, dtype=bool)]
    for i in order:
        row = q.tables[i - 1]
        lo, hi = min(row), max(row)
        cur = layers[-1]
        new = np.zeros(len(cur) + (hi - lo), dtype=bool)
        for w in set(row):
            start = w - lo
            new[start : start + len(cur)] |= cur
        layers.append(new)
        offsets.append(offsets[-1] + lo)
    table = ReachTable(tuple(offsets), tuple(layers), tuple(order))
    return ReachableSums(q, table)
