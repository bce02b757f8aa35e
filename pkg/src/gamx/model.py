"""Model core: additive models, feature domains, loading, and exact evaluation.

A model is an intercept plus k weighted single-feature components, each a
cubic spline, a 1-in/1-out ReLU network, or a threshold-split tree ensemble.
Classification applies a step to the additive sum with step(0) = 1; that
boundary convention is used consistently by every query in the engine.  All
parameters are exact rationals end-to-end; queries are threshold decisions
and float rounding could flip answers.

Feature indices are 1-based at the public surface, matching the document
format and the CLI.

Document format (JSON): see README.  Rationals are serialized as integers or
"p/q" strings; decimal strings like "0.25" are also accepted on input.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DomainError, ParseError, ValidationError
from .polyops import Poly, poly_eval, poly_from


class Task(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


def step(z) -> int:
    """Decision rule for classification: 1 iff the additive sum is >= 0."""
    return 1 if z >= 0 else 0


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplineShape:
    """Piecewise polynomial: knots a_1 < ... < a_d, one cubic per interval.

    Pieces are half-open [a_j, a_{j+1}) except the final piece, which is
    closed at a_d.  Interior knots must agree in value between neighboring
    pieces (the function is continuous); the continuous-domain redundancy
    fast path relies on it.
    """

    knots: tuple[Fraction, ...]
    polys: tuple[Poly, ...]


@dataclass(frozen=True)
class MlpShape:
    """1-in/1-out ReLU network; layers are (weights[in][out], bias[out])."""

    layers: tuple[tuple[tuple[tuple[Fraction, ...], ...], tuple[Fraction, ...]], ...]


@dataclass(frozen=True)
class TreeLeaf:
    value: Fraction


@dataclass(frozen=True)
class TreeSplit:
    """Threshold test on the single scalar input.

    op "ge": take `yes` when x >= threshold; op "lt": take `yes` when
    x < threshold.
    """

    threshold: Fraction
    op: str
    yes: "TreeNode"
    no: "TreeNode"


TreeNode = Union[TreeLeaf, TreeSplit]


@dataclass(frozen=True)
class TreeEnsembleShape:
    trees: tuple[TreeNode, ...]
    tree_weights: tuple[Fraction, ...]
    tree_bias: Fraction


Shape = Union[SplineShape, MlpShape, TreeEnsembleShape]


@dataclass(frozen=True)
class Component:
    beta: Fraction
    shape: Shape


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Enumerable:
    """Explicit finite value list, stored sorted ascending and deduplicated."""

    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class IntegerRange:
    lo: int
    hi: int


@dataclass(frozen=True)
class RealInterval:
    lo: Fraction
    hi: Fraction


FeatureDomain = Union[Enumerable, IntegerRange, RealInterval]


def domain_contains(domain: FeatureDomain, value: Fraction) -> bool:
    if isinstance(domain, Enumerable):
        return value in domain.values
    if isinstance(domain, IntegerRange):
        return value.denominator == 1 and domain.lo <= value <= domain.hi
    return domain.lo <= value <= domain.hi


def domain_hull(domain: FeatureDomain) -> tuple[Fraction, Fraction]:
    """Convex hull of the domain as a closed rational interval."""
    if isinstance(domain, Enumerable):
        return domain.values[0], domain.values[-1]
    return Fraction(domain.lo), Fraction(domain.hi)


# ---------------------------------------------------------------------------
# Model, instance, subsets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GamModel:
    task: Task
    beta0: Fraction
    components: tuple[Component, ...]
    domains: tuple[FeatureDomain, ...]

    @property
    def k(self) -> int:
        return len(self.components)

    def component(self, index: int) -> Component:
        return self.components[index - 1]

    def domain(self, index: int) -> FeatureDomain:
        return self.domains[index - 1]


@dataclass(frozen=True)
class Instance:
    values: tuple[Fraction, ...]

    def value(self, index: int) -> Fraction:
        return self.values[index - 1]

    def replace(self, index: int, v: Fraction) -> "Instance":
        vals = list(self.values)
        vals[index - 1] = v
        return Instance(tuple(vals))


@dataclass(frozen=True)
class FeatureSubset:
    indices: frozenset[int]

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(sorted(self.indices))

    def __contains__(self, i: int) -> bool:
        return i in self.indices


def make_subset(indices: Iterable[int], k: int) -> FeatureSubset:
    idx = frozenset(int(i) for i in indices)
    for i in idx:
        if not 1 <= i <= k:
            raise ValidationError(f"feature index {i} out of range 1..{k}")
    return FeatureSubset(idx)


# ---------------------------------------------------------------------------
# Rational parsing / serialization
# ---------------------------------------------------------------------------


def parse_rational(value, where: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{where}: booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: cannot parse rational {value!r}") from exc
    raise ParseError(
        f"{where}: rationals must be integers or strings like '3/4', got {type(value).__name__}"
    )


def format_rational(q: Fraction):
    if q.denominator == 1:
        return int(q)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _validate_spline(shape: SplineShape, where: str) -> None:
    if len(shape.knots) < 2:
        raise ValidationError(f"{where}: spline needs at least two knots")
    if len(shape.polys) != len(shape.knots) - 1:
        raise ValidationError(
            f"{where}: spline must have exactly one polynomial per knot interval "
            f"({len(shape.knots) - 1} expected, {len(shape.polys)} given)"
        )
    for a, b in zip(shape.knots, shape.knots[1:]):
        if not a < b:
            raise ValidationError(f"{where}: knots must be strictly increasing")
    for poly in shape.polys:
        if not 1 <= len(poly) <= 4:
            raise ValidationError(f"{where}: spline pieces must have degree <= 3")
    for j in range(1, len(shape.knots) - 1):
        knot = shape.knots[j]
        left = poly_eval(shape.polys[j - 1], knot)
        right = poly_eval(shape.polys[j], knot)
        if left != right:
            raise ValidationError(
                f"{where}: spline is discontinuous at knot {knot} ({left} vs {right})"
            )


def _validate_mlp(shape: MlpShape, where: str) -> None:
    if not shape.layers:
        raise ValidationError(f"{where}: network needs at least one layer")
    width = 1
    for li, (weights, bias) in enumerate(shape.layers):
        if len(weights) != width:
            raise ValidationError(
                f"{where}: layer {li} expects {width} inputs, weights have {len(weights)} rows"
            )
        out = len(bias)
        if out == 0:
            raise ValidationError(f"{where}: layer {li} has empty bias")
        for row in weights:
            if len(row) != out:
                raise ValidationError(
                    f"{where}: layer {li} weight rows must have {out} entries"
                )
        width = out
    if width != 1:
        raise ValidationError(f"{where}: network output width must be 1, got {width}")


def _validate_tree(node: TreeNode, lo, hi, where: str) -> None:
    # Every root-to-leaf path must describe a non-empty interval [lo, hi).
    # lo/hi are None while unbounded.
    if isinstance(node, TreeLeaf):
        return
    r = node.threshold
    if node.op == "ge":
        branches = (((r if lo is None else max(lo, r)), hi, node.yes),
                    (lo, (r if hi is None else min(hi, r)), node.no))
    elif node.op == "lt":
        branches = ((lo, (r if hi is None else min(hi, r)), node.yes),
                    ((r if lo is None else max(lo, r)), hi, node.no))
    else:
        raise ValidationError(f"{where}: unknown split op {node.op!r}")
    for branch_lo, branch_hi, child in branches:
        if branch_lo is not None and branch_hi is not None and branch_lo >= branch_hi:
            raise ValidationError(
                f"{where}: inconsistent path, split at {r} leaves an empty interval"
            )
        _validate_tree(child, branch_lo, branch_hi, where)


def _validate_ensemble(shape: TreeEnsembleShape, where: str) -> None:
    if len(shape.trees) != len(shape.tree_weights):
        raise ValidationError(f"{where}: one weight per tree required")
    for t, tree in enumerate(shape.trees):
        _validate_tree(tree, None, None, f"{where} tree {t}")


def _validate_domain(domain: FeatureDomain, where: str) -> None:
    if isinstance(domain, Enumerable):
        if not domain.values:
            raise ValidationError(f"{where}: enumerable domain must be non-empty")
        for a, b in zip(domain.values, domain.values[1:]):
            if not a < b:
                raise ValidationError(f"{where}: enumerable values must be sorted unique")
    elif isinstance(domain, (IntegerRange, RealInterval)):
        if domain.lo > domain.hi:
            raise ValidationError(f"{where}: domain lo must be <= hi")


def validate_model(model: GamModel) -> None:
    """Check every structural invariant; raises ValidationError on the first hit."""
    if model.k < 1:
        raise ValidationError("model must have at least one component")
    if len(model.domains) != model.k:
        raise ValidationError(
            f"components and domains must align: {model.k} components, "
            f"{len(model.domains)} domains"
        )
    for i, (comp, domain) in enumerate(zip(model.components, model.domains), start=1):
        where = f"feature {i}"
        _validate_domain(domain, where)
        if isinstance(comp.shape, SplineShape):
            _validate_spline(comp.shape, where)
            lo, hi = domain_hull(domain)
            if comp.shape.knots[0] > lo or comp.shape.knots[-1] < hi:
                raise ValidationError(
                    f"{where}: knot span [{comp.shape.knots[0]}, {comp.shape.knots[-1]}] "
                    f"does not cover the domain hull [{lo}, {hi}]"
                )
        elif isinstance(comp.shape, MlpShape):
            _validate_mlp(comp.shape, where)
        elif isinstance(comp.shape, TreeEnsembleShape):
            _validate_ensemble(comp.shape, where)
        else:
            raise ValidationError(f"{where}: unknown shape {type(comp.shape).__name__}")


def validate_instance(model: GamModel, x: Instance) -> None:
    if len(x.values) != model.k:
        raise DomainError(
            f"instance has {len(x.values)} values, model expects {model.k}"
        )
    for i, (v, domain) in enumerate(zip(x.values, model.domains), start=1):
        if not domain_contains(domain, v):
            raise DomainError(f"feature {i}: value {v} outside its domain")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_spline(shape: SplineShape, v: Fraction) -> Fraction:
    knots = shape.knots
    if v < knots[0] or v > knots[-1]:
        raise DomainError(f"value {v} outside spline knot span")
    j = bisect_right(knots, v) - 1
    if j >= len(shape.polys):
        j = len(shape.polys) - 1  # closed final piece
    return poly_eval(shape.polys[j], v)


def eval_mlp(shape: MlpShape, v: Fraction) -> Fraction:
    acts = [v]
    last = len(shape.layers) - 1
    for li, (weights, bias) in enumerate(shape.layers):
        out = []
        for o in range(len(bias)):
            z = bias[o]
            for i, a in enumerate(acts):
                z += a * weights[i][o]
            if li < last and z < 0:  # ReLU on hidden layers, identity on output
                z = Fraction(0)
            out.append(z)
        acts = out
    return acts[0]


def eval_tree(node: TreeNode, v: Fraction) -> Fraction:
    while isinstance(node, TreeSplit):
        hit = v >= node.threshold if node.op == "ge" else v < node.threshold
        node = node.yes if hit else node.no
    return node.value


def eval_ensemble(shape: TreeEnsembleShape, v: Fraction) -> Fraction:
    total = shape.tree_bias
    for tree, w in zip(shape.trees, shape.tree_weights):
        total += w * eval_tree(tree, v)
    return total


def eval_shape(shape: Shape, v: Fraction) -> Fraction:
    if isinstance(shape, SplineShape):
        return eval_spline(shape, v)
    if isinstance(shape, MlpShape):
        return eval_mlp(shape, v)
    return eval_ensemble(shape, v)


def evaluate_component(model: GamModel, index: int, v: Fraction) -> Fraction:
    """Exact weighted component value beta_i * f_i(v)."""
    domain = model.domain(index)
    if not domain_contains(domain, v):
        raise DomainError(f"feature {index}: value {v} outside its domain")
    comp = model.component(index)
    if comp.beta == 0:
        return Fraction(0)
    return comp.beta * eval_shape(comp.shape, v)


def presum(model: GamModel, x: Instance) -> Fraction:
    """The additive sum before any step is applied."""
    validate_instance(model, x)
    total = model.beta0
    for i in range(1, model.k + 1):
        total += evaluate_component(model, i, x.value(i))
    return total


def evaluate(model: GamModel, x: Instance):
    """Exact prediction: a rational for regression, a 0/1 label otherwise."""
    total = presum(model, x)
    if model.task is Task.CLASSIFICATION:
        return step(total)
    return total


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------


def discretize_domain(model: GamModel, grids: Sequence[Sequence]) -> GamModel:
    """Replace every domain with an enumerable grid of in-domain values.

    Components are untouched, so predictions agree with the original model on
    any instance whose coordinates lie on the grid.
    """
    if len(grids) != model.k:
        raise DomainError(f"need {model.k} grids, got {len(grids)}")
    new_domains = []
    for i, (grid, domain) in enumerate(zip(grids, model.domains), start=1):
        values = sorted({Fraction(v) for v in grid})
        if not values:
            raise DomainError(f"feature {i}: empty grid")
        for v in values:
            if not domain_contains(domain, v):
                raise DomainError(f"feature {i}: grid value {v} outside the original domain")
        new_domains.append(Enumerable(tuple(values)))
    return GamModel(model.task, model.beta0, model.components, tuple(new_domains))


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _parse_tree_node(doc, where: str) -> TreeNode:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: tree node must be an object")
    if "value" in doc:
        return TreeLeaf(parse_rational(doc["value"], f"{where}.value"))
    threshold = parse_rational(_require(doc, "threshold", where), f"{where}.threshold")
    op = doc.get("op", "ge")
    yes = _parse_tree_node(_require(doc, "yes", where), f"{where}.yes")
    no = _parse_tree_node(_require(doc, "no", where), f"{where}.no")
    return TreeSplit(threshold, op, yes, no)


def _parse_shape(doc, where: str) -> Shape:
    kind = _require(doc, "kind", where)
    if kind == "spline":
        knots = tuple(
            parse_rational(v, f"{where}.knots") for v in _require(doc, "knots", where)
        )
        polys = tuple(
            poly_from([parse_rational(c, f"{where}.polys") for c in piece])
            for piece in _require(doc, "polys", where)
        )
        return SplineShape(knots, polys)
    if kind == "mlp":
        layers = []
        for li, layer in enumerate(_require(doc, "layers", where)):
            weights = tuple(
                tuple(
                    parse_rational(w, f"{where}.layers[{li}].weights") for w in row
                )
                for row in _require(layer, "weights", f"{where}.layers[{li}]")
            )
            bias = tuple(
                parse_rational(b, f"{where}.layers[{li}].bias")
                for b in _require(layer, "bias", f"{where}.layers[{li}]")
            )
            layers.append((weights, bias))
        return MlpShape(tuple(layers))
    if kind == "tree_ensemble":
        trees = tuple(
            _parse_tree_node(t, f"{where}.trees[{ti}]")
            for ti, t in enumerate(_require(doc, "trees", where))
        )
        weights = tuple(
            parse_rational(w, f"{where}.tree_weights")
            for w in _require(doc, "tree_weights", where)
        )
        bias = parse_rational(doc.get("tree_bias", 0), f"{where}.tree_bias")
        return TreeEnsembleShape(trees, weights, bias)
    raise ParseError(f"{where}: unknown shape kind {kind!r}")


def _parse_domain(doc, where: str) -> FeatureDomain:
    kind = _require(doc, "kind", where)
    if kind == "enumerable":
        raw = [parse_rational(v, f"{where}.values") for v in _require(doc, "values", where)]
        return Enumerable(tuple(sorted(set(raw))))
    if kind == "int_range":
        lo = _require(doc, "lo", where)
        hi = _require(doc, "hi", where)
        if not isinstance(lo, int) or not isinstance(hi, int) or isinstance(lo, bool):
            raise ParseError(f"{where}: int_range bounds must be integers")
        return IntegerRange(lo, hi)
    if kind == "real_interval":
        return RealInterval(
            parse_rational(_require(doc, "lo", where), f"{where}.lo"),
            parse_rational(_require(doc, "hi", where), f"{where}.hi"),
        )
    raise ParseError(f"{where}: unknown domain kind {kind!r}")


def model_from_dict(doc: dict) -> GamModel:
    task_raw = _require(doc, "task", "model")
    try:
        task = Task(task_raw)
    except ValueError:
        raise ParseError(f"model.task must be 'regression' or 'classification', got {task_raw!r}")
    beta0 = parse_rational(_require(doc, "beta0", "model"), "model.beta0")
    comps_doc = _require(doc, "components", "model")
    domains_doc = _require(doc, "domains", "model")
    if not isinstance(comps_doc, list) or not isinstance(domains_doc, list):
        raise ParseError("model.components and model.domains must be arrays")
    components = tuple(
        Component(
            parse_rational(_require(c, "beta", f"components[{i}]"), f"components[{i}].beta"),
            _parse_shape(_require(c, "shape", f"components[{i}]"), f"components[{i}].shape"),
        )
        for i, c in enumerate(comps_doc)
    )
    domains = tuple(
        _parse_domain(d, f"domains[{i}]") for i, d in enumerate(domains_doc)
    )
    model = GamModel(task, beta0, components, domains)
    validate_model(model)
    return model


def load_model(data) -> GamModel:
    """Parse and validate a model document (JSON text, bytes, or dict)."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed model document: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("model document must be a JSON object")
    return model_from_dict(data)


def _tree_to_dict(node: TreeNode) -> dict:
    if isinstance(node, TreeLeaf):
        return {"value": format_rational(node.value)}
    return {
        "threshold": format_rational(node.threshold),
        "op": node.op,
        "yes": _tree_to_dict(node.yes),
        "no": _tree_to_dict(node.no),
    }


def _shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, SplineShape):
        return {
            "kind": "spline",
            "knots": [format_rational(k) for k in shape.knots],
            "polys": [[format_rational(c) for c in piece] for piece in shape.polys],
        }
    if isinstance(shape, MlpShape):
        return {
            "kind": "mlp",
            "layers": [
                {
                    "weights": [[format_rational(w) for w in row] for row in weights],
                    "bias": [format_rational(b) for b in bias],
                }
                for weights, bias in shape.layers
            ],
        }
    return {
        "kind": "tree_ensemble",
        "trees": [_tree_to_dict(t) for t in shape.trees],
        "tree_weights": [format_rational(w) for w in shape.tree_weights],
        "tree_bias": format_rational(shape.tree_bias),
    }


def _domain_to_dict(domain: FeatureDomain) -> dict:
    if isinstance(domain, Enumerable):
        return {"kind": "enumerable", "values": [format_rational(v) for v in domain.values]}
    if isinstance(domain, IntegerRange):
        return {"kind": "int_range", "lo": domain.lo, "hi": domain.hi}
    return {
        "kind": "real_interval",
        "lo": format_rational(domain.lo),
        "hi": format_rational(domain.hi),
    }


def model_to_dict(model: GamModel) -> dict:
    return {
        "task": model.task.value,
        "beta0": format_rational(model.beta0),
        "components": [
            {"beta": format_rational(c.beta), "shape": _shape_to_dict(c.shape)}
            for c in model.components
        ],
        "domains": [_domain_to_dict(d) for d in model.domains],
    }


def serialize_model(model: GamModel) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def instance_from_dict(doc: dict) -> Instance:
    values = _require(doc, "values", "instance")
    if not isinstance(values, list):
        raise ParseError("instance.values must be an array")
    return Instance(tuple(parse_rational(v, "instance.values") for v in values))


def load_instance(data) -> Instance:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed instance document: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("instance document must be a JSON object")
    return instance_from_dict(data)


def instance_to_dict(x: Instance) -> dict:
    return {"values": [format_rational(v) for v in x.values]}


def serialize_instance(x: Instance) -> str:
    return json.dumps(instance_to_dict(x), indent=2)
