"""Seeded random models, instances, and distributions.

Fuel for property tests and the CLI `gen` subcommand.  Generation is a pure
function of its arguments: the same seed yields byte-identical documents.

Parameter pools are deliberately coarse rationals (dyadic for enumerable
models, decimal for interval models) so that component values stay small in
denominator: lossless quantization scales, and with them the counting DP
spans, remain tiny for generated models.  Cubic spline pieces are built from
their derivative roots, so every interior critical point is rational by
construction; consecutive pieces share their knot value, keeping the spline
continuous.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .model import GamModel, Instance, format_rational, load_instance, load_model


def _frac(rng: random.Random, denoms, lo: int = -2, hi: int = 2) -> Fraction:
    den = rng.choice(denoms)
    return Fraction(rng.randint(lo * den, hi * den), den)


def _nonzero_frac(rng, denoms, lo=-2, hi=2) -> Fraction:
    while True:
        q = _frac(rng, denoms, lo, hi)
        if q != 0:
            return q


def _fmt(q: Fraction):
    return format_rational(q)


class _Pools:
    def __init__(self, domain_kind: str):
        coarse = domain_kind == "enumerable"
        self.coeff = (1, 2) if coarse else (1, 2, 4, 5)
        self.point = (1, 2) if coarse else (1, 2, 4, 5, 10, 20)
        self.weight = (1, 2) if coarse else (1, 2, 4)
        # network weights stay halves so composed values keep tiny lossless
        # scales: the counting DP's span is the product of scale and range
        self.net = (1, 2)
        # spline derivative roots snap to this denominator on coarse pools
        self.crit_snap = 2 if coarse else None


def _gen_domain(rng, domain_kind: str, pools: _Pools, n_values: int) -> dict:
    if domain_kind == "enumerable":
        values: set[Fraction] = set()
        while len(values) < n_values:
            values.add(_frac(rng, pools.point, -2, 2))
        return {"kind": "enumerable", "values": [_fmt(v) for v in sorted(values)]}
    if domain_kind == "int_range":
        lo = rng.randint(-5, 0)
        return {"kind": "int_range", "lo": lo, "hi": lo + rng.randint(1, 8)}
    if domain_kind == "real_interval":
        lo = _frac(rng, pools.point, -3, 1)
        width = _nonzero_frac(rng, pools.point, 0, 3)
        if width < 0:
            width = -width
        if width == 0:
            width = Fraction(1)
        return {
            "kind": "real_interval",
            "lo": _fmt(lo),
            "hi": _fmt(lo + width),
        }
    raise ValueError(f"unknown domain kind {domain_kind!r}")


def _hull(domain_doc: dict) -> tuple[Fraction, Fraction]:
    if domain_doc["kind"] == "enumerable":
        vals = [Fraction(v) for v in domain_doc["values"]]
        return min(vals), max(vals)
    return Fraction(domain_doc["lo"]), Fraction(domain_doc["hi"])


def _gen_spline(rng, lo: Fraction, hi: Fraction, pools: _Pools, max_pieces: int) -> dict:
    n_pieces = rng.randint(1, max_pieces)
    interior: set[Fraction] = set()
    attempts = 0
    while len(interior) < n_pieces - 1 and attempts < 40:
        t = lo + (hi - lo) * Fraction(rng.randint(1, 7), 8)
        if lo < t < hi:
            interior.add(t)
        attempts += 1
    knots = [lo, *sorted(interior), hi]
    polys = []
    prev_value: Optional[Fraction] = None

    def crit(a, b):
        r = a + (b - a) * Fraction(rng.randint(-2, 10), 8)
        if pools.crit_snap:
            r = Fraction(round(r * pools.crit_snap), pools.crit_snap)
        return r

    for j in range(len(knots) - 1):
        a, b = knots[j], knots[j + 1]
        deg = rng.choice((1, 1, 2, 2, 3, 3))
        lead = _nonzero_frac(rng, pools.coeff, -2, 2)
        if deg == 3:
            # derivative roots r1, r2: p' = 3*lead*(w - r1)(w - r2)
            r1, r2 = crit(a, b), crit(a, b)
            body = (lead, -3 * lead * (r1 + r2) / 2, 3 * lead * r1 * r2, Fraction(0))
        elif deg == 2:
            body = (lead, -2 * lead * crit(a, b), Fraction(0))
        else:
            body = (lead, Fraction(0))
        if prev_value is None:
            const = _frac(rng, pools.coeff, -2, 2)
        else:
            # match the previous piece's value at the shared knot
            const = prev_value - _poly_eval_body(body, a)
        poly = body[:-1] + (body[-1] + const,)
        prev_value = _poly_eval_body(poly, b)
        polys.append([_fmt(c) for c in poly])
    return {"kind": "spline", "knots": [_fmt(t) for t in knots], "polys": polys}


def _poly_eval_body(poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in poly:
        acc = acc * x + c
    return acc


def _gen_mlp(rng, pools: _Pools, depth: int, width: int) -> dict:
    hidden = rng.randint(1, max(depth, 1))
    widths = [1] + [rng.randint(1, width) for _ in range(hidden)] + [1]
    layers = []
    for li in range(len(widths) - 1):
        n_in, n_out = widths[li], widths[li + 1]
        weights = [
            [_fmt(_frac(rng, pools.net, -2, 2)) for _ in range(n_out)]
            for _ in range(n_in)
        ]
        bias = [_fmt(_frac(rng, pools.net, -2, 2)) for _ in range(n_out)]
        layers.append({"weights": weights, "bias": bias})
    return {"kind": "mlp", "layers": layers}


def _gen_tree(rng, lo: Fraction, hi: Fraction, pools: _Pools, depth: int) -> dict:
    if depth == 0 or hi - lo < Fraction(1, 8) or rng.random() < 0.3:
        return {"value": _fmt(_frac(rng, pools.weight, -2, 2))}
    r = lo + (hi - lo) * Fraction(rng.randint(1, 7), 8)
    op = rng.choice(("ge", "lt"))
    above = _gen_tree(rng, r, hi, pools, depth - 1)
    below = _gen_tree(rng, lo, r, pools, depth - 1)
    if op == "ge":
        yes, no = above, below
    else:
        yes, no = below, above
    return {"threshold": _fmt(r), "op": op, "yes": yes, "no": no}


def _gen_ensemble(rng, lo, hi, pools: _Pools, n_trees: int, depth: int) -> dict:
    count = rng.randint(1, n_trees)
    return {
        "kind": "tree_ensemble",
        "trees": [_gen_tree(rng, lo, hi, pools, depth) for _ in range(count)],
        "tree_weights": [_fmt(_nonzero_frac(rng, pools.weight, -2, 2)) for _ in range(count)],
        "tree_bias": _fmt(_frac(rng, pools.weight, -1, 1)),
    }


def _gen_instance(rng, domain_doc: dict, pools: _Pools) -> Fraction:
    if domain_doc["kind"] == "enumerable":
        return Fraction(rng.choice(domain_doc["values"]))
    if domain_doc["kind"] == "int_range":
        return Fraction(rng.randint(domain_doc["lo"], domain_doc["hi"]))
    lo, hi = Fraction(domain_doc["lo"]), Fraction(domain_doc["hi"])
    return lo + (hi - lo) * Fraction(rng.randint(0, 16), 16)


def gen_documents(
    seed: int,
    k: int,
    domain_kind: str = "enumerable",
    shape_kind: str = "spline",
    task: str = "classification",
    n_values: int = 3,
    pieces: int = 2,
    depth: int = 2,
    width: int = 3,
    n_trees: int = 2,
    tree_depth: int = 2,
) -> dict:
    """Deterministic model + instance documents for the given parameters."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if shape_kind not in ("spline", "mlp", "tree_ensemble"):
        raise ValueError(f"unknown shape kind {shape_kind!r}")
    rng = random.Random(seed)
    pools = _Pools(domain_kind)
    domains = [_gen_domain(rng, domain_kind, pools, n_values) for _ in range(k)]
    components = []
    for d in domains:
        lo, hi = _hull(d)
        if shape_kind == "spline":
            shape = _gen_spline(rng, lo, hi, pools, pieces)
        elif shape_kind == "mlp":
            shape = _gen_mlp(rng, pools, depth, width)
        else:
            shape = _gen_ensemble(rng, lo, hi, pools, n_trees, tree_depth)
        beta = _frac(rng, pools.weight, -2, 2)
        components.append({"beta": _fmt(beta), "shape": shape})
    model_doc = {
        "task": task,
        "beta0": _fmt(_frac(rng, pools.weight, -2, 2)),
        "components": components,
        "domains": domains,
    }
    instance_doc = {
        "values": [_fmt(_gen_instance(rng, d, pools)) for d in domains]
    }
    return {"model": model_doc, "instance": instance_doc}


def gen_model(seed: int, k: int, **kwargs) -> tuple[GamModel, Instance]:
    """Generated documents pushed through the real loader."""
    import json

    docs = gen_documents(seed, k, **kwargs)
    model = load_model(json.dumps(docs["model"]))
    instance = load_instance(json.dumps(docs["instance"]))
    return model, instance


def random_categorical_doc(seed: int, model: GamModel) -> dict:
    """A non-uniform categorical distribution document for an enumerable model."""
    rng = random.Random(seed)
    features = []
    for domain in model.domains:
        n = len(domain.values)
        cuts = sorted(rng.randint(1, 2 * n) for _ in range(n - 1))
        weights = []
        prev = 0
        for c in [*cuts, 2 * n]:
            weights.append(c - prev + 1)  # strictly positive masses
            prev = c
        total = sum(weights)
        features.append(
            {
                "kind": "categorical",
                "probs": [_fmt(Fraction(w, total)) for w in weights],
            }
        )
    return {"features": features}
