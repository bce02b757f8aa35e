"""Ground-truth reference implementations by exhaustive enumeration.

Every query is recomputed straight from its definition over the full product
of enumerable domains.  Component values are scaled to a common integer
denominator so the grids hold exact integers; numpy does the enumeration
bookkeeping but no float ever enters a decision.  The state-space ceiling is
a hard error, never silent sampling: an oracle that approximates is not an
oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial, lcm, prod
from typing import Optional

import numpy as np

from .distributions import (
    Categorical,
    ProductDistribution,
    categorical_numerators,
    uniform_for,
)
from .errors import DomainError, StateSpaceTooLargeError, UnsupportedTaskError, ValidationError
from .model import (
    Enumerable,
    FeatureSubset,
    GamModel,
    Instance,
    Task,
    make_subset,
)
from .piecewise import component_values

DEFAULT_CEILING = 10**6
_ENV_CEILING = "GAMX_ORACLE_CEILING"

_INT64_SAFE = 2**62


def state_space_ceiling() -> int:
    raw = os.environ.get(_ENV_CEILING)
    if raw is None:
        return DEFAULT_CEILING
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{_ENV_CEILING} must be an integer, got {raw!r}")


@dataclass(frozen=True)
class _Grid:
    model: GamModel
    scale: int                       # common denominator of all values
    tables: tuple[tuple[int, ...], ...]
    values: np.ndarray               # scaled additive sums incl. intercept
    labels: Optional[np.ndarray]     # step labels (classification only)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def _build_grid(model: GamModel) -> _Grid:
    # models are immutable; ceiling changes via the environment invalidate
    # nothing because the ceiling is re-checked before the cache is consulted
    sizes = [
        len(d.values) if isinstance(d, Enumerable) else 0 for d in model.domains
    ]
    total = prod(sizes)
    if all(sizes) and total > state_space_ceiling():
        raise StateSpaceTooLargeError(
            f"state space {total} exceeds the oracle ceiling "
            f"(override with {_ENV_CEILING})"
        )
    return _build_grid_cached(model)


@lru_cache(maxsize=64)
def _build_grid_cached(model: GamModel) -> _Grid:
    sizes = []
    for i, domain in enumerate(model.domains, start=1):
        if not isinstance(domain, Enumerable):
            raise DomainError(
                f"feature {i}: the oracle enumerates only enumerable domains"
            )
        sizes.append(len(domain.values))
    total = prod(sizes)
    ceiling = state_space_ceiling()
    if total > ceiling:
        raise StateSpaceTooLargeError(
            f"state space {total} exceeds the oracle ceiling {ceiling} "
            f"(override with {_ENV_CEILING})"
        )
    raw_tables = [
        [w for _, w in component_values(model.component(i), model.domain(i))]
        for i in range(1, model.k + 1)
    ]
    denoms = [model.beta0.denominator]
    for row in raw_tables:
        denoms.extend(w.denominator for w in row)
    scale = lcm(*denoms)
    tables = tuple(tuple(int(w * scale) for w in row) for row in raw_tables)
    b0 = int(model.beta0 * scale)
    bound = abs(b0) + sum(max(abs(w) for w in row) for row in tables)
    dtype = np.int64 if bound < _INT64_SAFE else object
    values = np.full(tuple(sizes), b0, dtype=dtype)
    for ax, row in enumerate(tables):
        shape = [1] * model.k
        shape[ax] = len(row)
        values = values + np.array(row, dtype=dtype).reshape(shape)
    labels = None
    if model.task is Task.CLASSIFICATION:
        labels = (values >= 0).astype(np.int8)
    return _Grid(model, scale, tables, values, labels)


def _x_indices(model: GamModel, x: Instance) -> tuple[int, ...]:
    if len(x.values) != model.k:
        raise DomainError(f"instance has {len(x.values)} values, model expects {model.k}")
    idx = []
    for i, v in enumerate(x.values, start=1):
        domain = model.domain(i)
        try:
            idx.append(domain.values.index(v))
        except ValueError:
            raise DomainError(f"feature {i}: value {v} outside its domain")
    return tuple(idx)


def _slicer(indices, subset_indices, k):
    return tuple(
        indices[i - 1] if i in subset_indices else slice(None) for i in range(1, k + 1)
    )


def _require_classification(model: GamModel, query: str) -> None:
    if model.task is not Task.CLASSIFICATION:
        raise UnsupportedTaskError(f"{query} is a classification query")


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def oracle_sufficient(model: GamModel, x: Instance, subset) -> bool:
    """Definition check: every completion of the free features keeps the label."""
    _require_classification(model, "sufficiency")
    grid = _build_grid(model)
    sub = subset if isinstance(subset, FeatureSubset) else make_subset(subset, model.k)
    idx = _x_indices(model, x)
    label = int(grid.labels[idx])
    region = grid.labels[_slicer(idx, sub.indices, model.k)]
    return bool((region == label).all())


def oracle_cc(model: GamModel, x: Instance, subset) -> Fraction:
    """Exact fraction of completions that preserve the prediction."""
    _require_classification(model, "completion counting")
    grid = _build_grid(model)
    sub = subset if isinstance(subset, FeatureSubset) else make_subset(subset, model.k)
    idx = _x_indices(model, x)
    label = int(grid.labels[idx])
    region = grid.labels[_slicer(idx, sub.indices, model.k)]
    matching = int((region == label).sum())
    return Fraction(matching, int(region.size))


def oracle_min_sufficient(model: GamModel, x: Instance) -> tuple[int, frozenset[int]]:
    """Minimum sufficient cardinality with one witness subset (lexicographic)."""
    _require_classification(model, "sufficiency")
    grid = _build_grid(model)
    idx = _x_indices(model, x)
    label = int(grid.labels[idx])
    features = range(1, model.k + 1)
    for size in range(0, model.k + 1):
        for combo in combinations(features, size):
            region = grid.labels[_slicer(idx, frozenset(combo), model.k)]
            if (region == label).all():
                return size, frozenset(combo)
    raise AssertionError("the full feature set is always sufficient")


def oracle_min_contrastive(
    model: GamModel, x: Instance
) -> Optional[tuple[int, frozenset[int], Instance]]:
    """Minimum contrastive cardinality, witness subset, and a flip assignment.

    None when the model is constant at the instance's prediction.
    """
    _require_classification(model, "contrastive search")
    grid = _build_grid(model)
    idx = _x_indices(model, x)
    label = int(grid.labels[idx])
    features = range(1, model.k + 1)
    for size in range(1, model.k + 1):
        for combo in combinations(features, size):
            chosen = frozenset(combo)
            free = frozenset(features) - chosen
            region = grid.labels[_slicer(idx, free, model.k)]
            flips = np.argwhere(region != label)
            if len(flips):
                flip = flips[0]
                witness = x
                for pos, i in enumerate(sorted(chosen)):
                    value = model.domain(i).values[int(flip[pos])]
                    witness = witness.replace(i, value)
                return size, chosen, witness
    return None


def oracle_redundant(model: GamModel, index: int) -> bool:
    """Definition check: the label never depends on this feature alone."""
    _require_classification(model, "redundancy")
    if not 1 <= index <= model.k:
        raise ValidationError(f"feature index {index} out of range 1..{model.k}")
    grid = _build_grid(model)
    ax = index - 1
    ref = np.expand_dims(grid.labels.take(0, axis=ax), ax)
    return bool((grid.labels == ref).all())


def _weight_vectors(model: GamModel, dist: ProductDistribution):
    numerators = []
    denominators = []
    for i in range(1, model.k + 1):
        marg = dist.marginal(i)
        if not isinstance(marg, Categorical):
            raise ValidationError(
                f"feature {i}: the oracle needs categorical marginals"
            )
        nums, den = categorical_numerators(marg)
        if len(nums) != len(model.domain(i).values):
            raise ValidationError(f"feature {i}: marginal does not match the domain")
        numerators.append(nums)
        denominators.append(den)
    return numerators, denominators


def _value_table(
    grid: _Grid, idx, numerators, denominators
) -> dict[frozenset[int], Fraction]:
    """v(S) = E[prediction | features in S fixed at x] for every subset."""
    model = grid.model
    k = model.k
    if model.task is Task.CLASSIFICATION:
        base = grid.labels
        value_scale = 1
    else:
        base = grid.values
        value_scale = grid.scale
    bound = int(np.abs(np.asarray(base, dtype=object)).max()) * prod(denominators)
    dtype = np.int64 if bound * base.size < _INT64_SAFE else object
    table: dict[frozenset[int], Fraction] = {}
    for size in range(0, k + 1):
        for combo in combinations(range(1, k + 1), size):
            chosen = frozenset(combo)
            arr = np.asarray(base[_slicer(idx, chosen, k)], dtype=dtype)
            free = [i for i in range(1, k + 1) if i not in chosen]
            for j in reversed(free):
                vec = np.asarray(numerators[j - 1], dtype=dtype)
                arr = arr @ vec
            den = prod(denominators[j - 1] for j in free) * value_scale
            table[chosen] = Fraction(int(arr), den)
    return table


def oracle_shap(
    model: GamModel,
    x: Instance,
    dist: Optional[ProductDistribution],
    index: int,
) -> Fraction:
    """Direct evaluation of the Shapley sum over all subsets."""
    return oracle_shap_all(model, x, dist)[index - 1]


def oracle_shap_all(
    model: GamModel, x: Instance, dist: Optional[ProductDistribution] = None
) -> list[Fraction]:
    if dist is None:
        dist = uniform_for(model)
    grid = _build_grid(model)
    idx = _x_indices(model, x)
    numerators, denominators = _weight_vectors(model, dist)
    table = _value_table(grid, idx, numerators, denominators)
    n = model.k
    out = []
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        phi = Fraction(0)
        for size in range(0, n):
            coeff = Fraction(factorial(size) * factorial(n - size - 1), factorial(n))
            for combo in combinations(others, size):
                s = frozenset(combo)
                phi += coeff * (table[s | {i}] - table[s])
        out.append(phi)
    return out
