"""Per-feature independent distributions.

The joint distribution is fully factorized: each feature gets its own
marginal and the joint probability of an assignment is the product of the
marginal probabilities.  Supported marginals match the domain variants:
categorical over an enumerable domain, uniform over an integer range, and
uniform or piecewise-polynomial density over a real interval.  Everything is
rational so downstream expectations stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Union

from .errors import ParseError, UnsupportedDistributionError, ValidationError
from .exactnum import exact_sign
from .model import (
    Enumerable,
    FeatureDomain,
    GamModel,
    IntegerRange,
    RealInterval,
    format_rational,
    parse_rational,
)
from .polyops import Poly, poly_from, poly_integrate, poly_min_on_interval


@dataclass(frozen=True)
class Categorical:
    """Probabilities aligned with the (sorted) values of an enumerable domain."""

    probs: tuple[Fraction, ...]


@dataclass(frozen=True)
class UniformInt:
    pass


@dataclass(frozen=True)
class UniformReal:
    pass


@dataclass(frozen=True)
class PiecewiseDensity:
    """Density given piecewise by polynomials over consecutive intervals."""

    breakpoints: tuple[Fraction, ...]
    polys: tuple[Poly, ...]


Marginal = Union[Categorical, UniformInt, UniformReal, PiecewiseDensity]


@dataclass(frozen=True)
class ProductDistribution:
    marginals: tuple[Marginal, ...]

    def marginal(self, index: int) -> Marginal:
        return self.marginals[index - 1]


def uniform_for(model: GamModel) -> ProductDistribution:
    """The default distribution: uniform per feature, variant-matched."""
    marginals: list[Marginal] = []
    for domain in model.domains:
        if isinstance(domain, Enumerable):
            n = len(domain.values)
            marginals.append(Categorical(tuple(Fraction(1, n) for _ in range(n))))
        elif isinstance(domain, IntegerRange):
            marginals.append(UniformInt())
        else:
            marginals.append(UniformReal())
    return ProductDistribution(tuple(marginals))


def validate_distribution(dist: ProductDistribution, model: GamModel) -> None:
    if len(dist.marginals) != model.k:
        raise ValidationError(
            f"distribution has {len(dist.marginals)} marginals, model has {model.k} features"
        )
    for i, (marg, domain) in enumerate(zip(dist.marginals, model.domains), start=1):
        _validate_marginal(marg, domain, f"feature {i}")


def _validate_marginal(marg: Marginal, domain: FeatureDomain, where: str) -> None:
    if isinstance(marg, Categorical):
        if not isinstance(domain, Enumerable):
            raise UnsupportedDistributionError(
                f"{where}: categorical marginal requires an enumerable domain"
            )
        if len(marg.probs) != len(domain.values):
            raise ValidationError(
                f"{where}: categorical marginal must list one probability per domain value"
            )
        if any(p < 0 for p in marg.probs):
            raise ValidationError(f"{where}: probabilities must be non-negative")
        if sum(marg.probs) != 1:
            raise ValidationError(f"{where}: probabilities must sum to 1")
    elif isinstance(marg, UniformInt):
        if not isinstance(domain, IntegerRange):
            raise UnsupportedDistributionError(
                f"{where}: uniform-integer marginal requires an integer-range domain"
            )
    elif isinstance(marg, UniformReal):
        if not isinstance(domain, RealInterval):
            raise UnsupportedDistributionError(
                f"{where}: uniform-real marginal requires a real-interval domain"
            )
    elif isinstance(marg, PiecewiseDensity):
        if not isinstance(domain, RealInterval):
            raise UnsupportedDistributionError(
                f"{where}: piecewise density requires a real-interval domain"
            )
        bps = marg.breakpoints
        if len(bps) < 2 or len(marg.polys) != len(bps) - 1:
            raise ValidationError(f"{where}: density needs one polynomial per interval")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise ValidationError(f"{where}: density breakpoints must be increasing")
        if bps[0] > domain.lo or bps[-1] < domain.hi:
            raise ValidationError(f"{where}: density must cover the feature interval")
        mass = Fraction(0)
        for (a, b), poly in zip(zip(bps, bps[1:]), marg.polys):
            lo = max(a, domain.lo)
            hi = min(b, domain.hi)
            if lo < hi:
                if exact_sign(poly_min_on_interval(poly, lo, hi)) < 0:
                    raise ValidationError(f"{where}: density is negative on [{lo}, {hi}]")
                mass += poly_integrate(poly, lo, hi)
        if mass != 1:
            raise ValidationError(f"{where}: density integrates to {mass}, expected 1")
    else:
        raise ValidationError(f"{where}: unknown marginal {type(marg).__name__}")


def categorical_numerators(marg: Categorical) -> tuple[list[int], int]:
    """Represent probabilities as integer numerators over one denominator."""
    den = lcm(*(p.denominator for p in marg.probs)) if marg.probs else 1
    return [int(p * den) for p in marg.probs], den


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def _marginal_from_dict(doc: dict, where: str) -> Marginal:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParseError(f"{where}: marginal must be an object with a 'kind'")
    kind = doc["kind"]
    if kind == "categorical":
        return Categorical(
            tuple(parse_rational(p, f"{where}.probs") for p in doc.get("probs", []))
        )
    if kind == "uniform_int":
        return UniformInt()
    if kind == "uniform_real":
        return UniformReal()
    if kind == "piecewise_density":
        return PiecewiseDensity(
            tuple(parse_rational(v, f"{where}.breakpoints") for v in doc.get("breakpoints", [])),
            tuple(
                poly_from([parse_rational(c, f"{where}.polys") for c in piece])
                for piece in doc.get("polys", [])
            ),
        )
    raise ParseError(f"{where}: unknown marginal kind {kind!r}")


def load_distribution(data, model: GamModel) -> ProductDistribution:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed distribution document: {exc}") from exc
    if not isinstance(data, dict) or "features" not in data:
        raise ParseError("distribution document must be an object with 'features'")
    dist = ProductDistribution(
        tuple(
            _marginal_from_dict(m, f"features[{i}]")
            for i, m in enumerate(data["features"])
        )
    )
    validate_distribution(dist, model)
    return dist


def _marginal_to_dict(marg: Marginal) -> dict:
    if isinstance(marg, Categorical):
        return {"kind": "categorical", "probs": [format_rational(p) for p in marg.probs]}
    if isinstance(marg, UniformInt):
        return {"kind": "uniform_int"}
    if isinstance(marg, UniformReal):
        return {"kind": "uniform_real"}
    return {
        "kind": "piecewise_density",
        "breakpoints": [format_rational(v) for v in marg.breakpoints],
        "polys": [[format_rational(c) for c in piece] for piece in marg.polys],
    }


def distribution_to_dict(dist: ProductDistribution) -> dict:
    return {"features": [_marginal_to_dict(m) for m in dist.marginals]}
