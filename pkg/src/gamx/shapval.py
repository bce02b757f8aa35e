"""Exact Shapley attributions under per-feature independent distributions.

Regression: additivity collapses the subset sum, so each feature's value is
its weighted component at the instance minus that component's expectation;
the coalition coefficients sum to one, leaving no extra factor.  This closed
form is validated against the brute-force subset enumeration in the test
suite before being trusted.

Classification: the value function is a probability of landing on label 1,
which is not additive, so attributions run through a three-index dynamic
program over the quantized model: (features processed, number of fixed
features, accumulated integer weight).  Every feature other than the target
branches as fixed (its instance weight, advancing the fixed count) or free
(probability-weighted over its table); aggregating the final layers by fixed
count gives the total coalition value per size, and the Shapley coefficients
k!(n-k-1)!/n! combine the target-fixed and target-free aggregates.  All
masses are integer numerators over a common product denominator, so the
result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional

import numpy as np

from .counting import (
    INT_CAPACITY,
    QuantizedModel,
    expected_label,
    quantize_lossless,
)
from .distributions import (
    Categorical,
    ProductDistribution,
    categorical_numerators,
    uniform_for,
    validate_distribution,
)
from .errors import PrecisionError, UnsupportedTaskError, ValidationError
from .model import Enumerable, GamModel, Instance, Task, evaluate, evaluate_component, presum, validate_instance
from .piecewise import expectation


@dataclass(frozen=True)
class ShapResult:
    """Per-feature attributions plus the efficiency anchors.

    baseline is the expected prediction with nothing fixed; full is the
    prediction at the instance.  The attributions always satisfy
    sum(values) = full - baseline exactly; shap_all raises if they do not.
    """

    values: tuple[Fraction, ...]
    baseline: Fraction
    full: Fraction


def shap_regression(
    model: GamModel, x: Instance, dist: Optional[ProductDistribution] = None
) -> ShapResult:
    """Closed-form exact attributions for a regression model."""
    if model.task is not Task.REGRESSION:
        raise UnsupportedTaskError("shap_regression requires a regression model")
    validate_instance(model, x)
    if dist is None:
        dist = uniform_for(model)
    validate_distribution(dist, model)
    values = []
    baseline = model.beta0
    for i in range(1, model.k + 1):
        expect = expectation(model.component(i), model.domain(i), dist.marginal(i))
        baseline += expect
        values.append(evaluate_component(model, i, x.value(i)) - expect)
    full = presum(model, x)
    return ShapResult(tuple(values), baseline, full)


def shap_classification(
    q: QuantizedModel,
    x: Instance,
    dist: ProductDistribution,
    index: int,
) -> Fraction:
    """Exact Shapley value of one feature for a classification model."""
    if q.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError("shap_classification requires a classification model")
    if not q.lossless:
        raise PrecisionError("shap_classification requires lossless quantization")
    if not 1 <= index <= q.k:
        raise ValidationError(f"feature index {index} out of range 1..{q.k}")
    n = q.k
    numerators: list[list[int]] = []
    denominators: list[int] = []
    for i in range(1, n + 1):
        marg = dist.marginal(i)
        if not isinstance(marg, Categorical):
            raise ValidationError(
                f"feature {i}: shap_classification requires categorical marginals"
            )
        nums, den = categorical_numerators(marg)
        if len(nums) != len(q.tables[i - 1]):
            raise ValidationError(f"feature {i}: marginal does not match the domain")
        numerators.append(nums)
        denominators.append(den)
    x_weights = [q.weight_of(i, x.value(i)) for i in range(1, n + 1)]

    others = [i for i in range(1, n + 1) if i != index]
    # masses M[t][C]: over subsets S of the other features with |S| = t,
    # probability numerator that the free features sum with the fixed
    # weights to C.  Fixed branches scale by the feature's denominator to
    # keep a common denominator prod(D_j, j != index).
    den_others = 1
    mass_bound = 1
    for i in others:
        den_others *= denominators[i - 1]
        mass_bound *= 2 * denominators[i - 1]  # fixed + free branches per feature
    dtype = np.int64 if mass_bound < INT_CAPACITY else object
    cur = np.ones((1, 1), dtype=dtype)
    cur_lo = 0
    for i in others:
        table = q.tables[i - 1]
        nums = numerators[i - 1]
        den = denominators[i - 1]
        w_fixed = x_weights[i - 1]
        lo = min(min(table), w_fixed)
        hi = max(max(table), w_fixed)
        new_lo = cur_lo + lo
        t_dim, span = cur.shape
        new = np.zeros((t_dim + 1, span + (hi - lo)), dtype=dtype)
        for w, m in zip(table, nums):
            if m:
                start = cur_lo + w - new_lo
                new[:t_dim, start : start + span] += m * cur
        start = cur_lo + w_fixed - new_lo
        new[1 : t_dim + 1, start : start + span] += den * cur
        cur, cur_lo = new, new_lo

    threshold = q.threshold
    den_i = denominators[index - 1]
    table_i = q.tables[index - 1]
    nums_i = numerators[index - 1]
    w_i = x_weights[index - 1]

    def suffix(row: np.ndarray, start: int) -> int:
        start = max(start, 0)
        if start >= len(row):
            return 0
        view = row[start:]
        if row.dtype == np.int64:  # mass_bound < capacity guarantees no overflow
            return int(view.sum())
        return int(view.sum(dtype=object))

    phi = Fraction(0)
    denom_total = den_others * den_i
    for t in range(cur.shape[0]):
        row = cur[t]
        with_i = den_i * suffix(row, threshold - w_i - cur_lo)
        without_i = 0
        for w, m in zip(table_i, nums_i):
            if m:
                without_i += m * suffix(row, threshold - w - cur_lo)
        coeff = Fraction(factorial(t) * factorial(n - t - 1), factorial(n))
        phi += coeff * Fraction(with_i - without_i, denom_total)
    return phi


def shap_all(
    model: GamModel, x: Instance, dist: Optional[ProductDistribution] = None
) -> ShapResult:
    """Attributions for every feature, dispatched by task.

    The efficiency identity sum(phi) = f(x) - E[f] is asserted exactly before
    returning; a violation would mean a computation bug, never noise.
    """
    if model.task is Task.REGRESSION:
        result = shap_regression(model, x, dist)
    else:
        validate_instance(model, x)
        for i, domain in enumerate(model.domains, start=1):
            if not isinstance(domain, Enumerable):
                raise UnsupportedTaskError(
                    f"feature {i}: classification attributions need enumerable "
                    "domains; discretize the model first"
                )
        if dist is None:
            dist = uniform_for(model)
        validate_distribution(dist, model)
        q = quantize_lossless(model)
        values = tuple(
            shap_classification(q, x, dist, i) for i in range(1, model.k + 1)
        )
        baseline = expected_label(q, dist)
        full = Fraction(evaluate(model, x))
        result = ShapResult(values, baseline, full)
    gap = result.full - result.baseline
    total = sum(result.values, Fraction(0))
    if total != gap:
        raise AssertionError(
            f"efficiency violated: sum(values) = {total}, full - baseline = {gap}"
        )
    return result
