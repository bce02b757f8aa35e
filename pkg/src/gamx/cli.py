"""Command-line surface for the explanation engine.

One query per invocation.  Results go to stdout as a single JSON document
(or a small text report with --format text); diagnostics go to stderr.

Exit codes:
  0  success
  1  a decision query answered "No" and --strict-exit was set
  2  validation, parse, or domain errors (including usage)
  3  unsupported configuration (hard cell without discretization, oracle
     ceiling, piece budget)
  4  precision or overflow failures
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .counting import BoundedCount, count_completions, quantize, quantize_lossless
from .distributions import load_distribution, uniform_for
from .errors import (
    BudgetExceededError,
    DomainError,
    GamxError,
    NoContrastiveReasonError,
    ParseError,
    PrecisionError,
    QuantizationOverflowError,
    StateSpaceTooLargeError,
    UnsupportedDistributionError,
    UnsupportedTaskError,
    ValidationError,
)
from .generate import gen_documents
from .model import (
    GamModel,
    Instance,
    discretize_domain,
    evaluate,
    format_rational,
    load_instance,
    load_model,
    make_subset,
    model_to_dict,
    parse_rational,
)
from .oracle import (
    oracle_cc,
    oracle_min_contrastive,
    oracle_min_sufficient,
    oracle_redundant,
    oracle_shap_all,
    oracle_sufficient,
)
from .piecewise import DEFAULT_PIECE_BUDGET
from .redundancy import is_redundant_continuous, is_redundant_discrete
from .shapval import shap_all
from .sufficiency import (
    check_sufficient,
    mcr_decision,
    minimal_contrastive,
    minimal_sufficient,
    msr_decision,
)
from .model import Enumerable, RealInterval, SplineShape

EXIT_OK = 0
EXIT_NO = 1
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3
EXIT_PRECISION = 4


def _fmt_value(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (list, tuple)):
        return [_fmt_value(u) for u in v]
    if isinstance(v, frozenset):
        return sorted(v)
    if isinstance(v, dict):
        return {k: _fmt_value(u) for k, u in v.items()}
    return v


def _emit(args, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload))
        return
    for key, value in payload.items():
        if key == "timings":
            print(f"{key}: {value['seconds']:.6f}s")
        else:
            print(f"{key}: {json.dumps(value)}")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_common(args) -> tuple[GamModel, Instance | None]:
    model = load_model(_read(args.model))
    instance = None
    if getattr(args, "instance", None):
        instance = load_instance(_read(args.instance))
    return model, instance


def _load_dist(args, model: GamModel):
    if getattr(args, "dist", None):
        return load_distribution(_read(args.dist), model)
    return uniform_for(model)


def _subset(args, model: GamModel):
    raw = args.subset or ""
    parts = [p for p in raw.replace(" ", "").split(",") if p]
    return make_subset((int(p) for p in parts), model.k)


def _witness_doc(instance) -> list | None:
    if instance is None:
        return None
    return [format_rational(v) for v in instance.values]


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID
    start = time.perf_counter()
    try:
        payload, no_answer = _dispatch(args)
    except (ParseError, ValidationError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (
        BudgetExceededError,
        StateSpaceTooLargeError,
        UnsupportedTaskError,
        UnsupportedDistributionError,
        NoContrastiveReasonError,
    ) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (PrecisionError, QuantizationOverflowError) as exc:
        print(f"precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except GamxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    payload["timings"] = {"seconds": time.perf_counter() - start}
    _emit(args, payload)
    if no_answer and args.strict_exit:
        return EXIT_NO
    return EXIT_OK


def _dispatch(args) -> tuple[dict, bool]:
    cmd = args.command
    if cmd == "gen":
        docs = gen_documents(
            seed=args.seed,
            k=args.k,
            domain_kind=args.domain_kind,
            shape_kind=args.shape,
            task=args.task,
            n_values=args.values,
        )
        if args.out_model:
            with open(args.out_model, "w", encoding="utf-8") as fh:
                json.dump(docs["model"], fh, indent=2)
                fh.write("\n")
        if args.out_instance:
            with open(args.out_instance, "w", encoding="utf-8") as fh:
                json.dump(docs["instance"], fh, indent=2)
                fh.write("\n")
        return {"query": "gen", "answer": docs, "exact": True}, False

    model, instance = _load_common(args)

    if cmd == "eval":
        value = evaluate(model, instance)
        return {
            "query": "eval",
            "answer": _fmt_value(Fraction(value)),
            "exact": True,
        }, False

    if cmd == "csr":
        result = check_sufficient(model, instance, _subset(args, model), args.budget)
        return {
            "query": "csr",
            "answer": result.sufficient,
            "witness": _witness_doc(result.witness),
            "exact": True,
        }, not result.sufficient

    if cmd == "msr":
        cert = minimal_sufficient(model, instance, args.budget)
        answer = len(cert.subset) <= args.d if args.d is not None else True
        payload = {
            "query": "msr",
            "answer": answer if args.d is not None else len(cert.subset),
            "certificate": sorted(cert.subset.indices),
            "cardinality": len(cert.subset),
            "exact": True,
        }
        return payload, args.d is not None and not answer

    if cmd == "mcr":
        try:
            cert = minimal_contrastive(model, instance, args.budget)
        except NoContrastiveReasonError:
            payload = {
                "query": "mcr",
                "answer": False,
                "certificate": None,
                "note": "no contrastive reason exists (constant prediction)",
                "exact": True,
            }
            return payload, True
        answer = len(cert.subset) <= args.d if args.d is not None else True
        payload = {
            "query": "mcr",
            "answer": answer if args.d is not None else len(cert.subset),
            "certificate": sorted(cert.subset.indices),
            "cardinality": len(cert.subset),
            "witness": _witness_doc(cert.witness),
            "exact": True,
        }
        return payload, args.d is not None and not answer

    if cmd == "fr":
        if all(isinstance(d, Enumerable) for d in model.domains):
            result = is_redundant_discrete(model, args.feature)
        elif all(isinstance(d, RealInterval) for d in model.domains) and all(
            isinstance(c.shape, SplineShape) for c in model.components
        ):
            result = is_redundant_continuous(model, args.feature)
        else:
            raise UnsupportedTaskError(
                "feature redundancy needs enumerable domains or a continuous "
                "smooth model; discretize the model first"
            )
        witness = None
        if result.witness is not None:
            witness = {
                "instance": _witness_doc(result.witness.instance),
                "v1": format_rational(result.witness.v1),
                "v2": format_rational(result.witness.v2),
            }
        return {
            "query": "fr",
            "answer": result.redundant,
            "witness": witness,
            "exact": True,
        }, not result.redundant

    if cmd == "cc":
        q = quantize(model, args.digits)
        result = count_completions(q, instance, _subset(args, model), allow_lossy=True)
        if isinstance(result, BoundedCount):
            return {
                "query": "cc",
                "answer": format_rational(result.value),
                "bounds": [format_rational(result.lower), format_rational(result.upper)],
                "exact": False,
            }, False
        return {"query": "cc", "answer": format_rational(result), "exact": True}, False

    if cmd == "shap":
        dist = _load_dist(args, model)
        result = shap_all(model, instance, dist)
        return {
            "query": "shap",
            "answer": [format_rational(v) for v in result.values],
            "baseline": format_rational(result.baseline),
            "full": format_rational(result.full),
            "efficiency_gap": format_rational(
                result.full - result.baseline - sum(result.values, Fraction(0))
            ),
            "exact": True,
        }, False

    if cmd == "quantize":
        q = quantize(model, args.digits)
        return {
            "query": "quantize",
            "answer": {
                "scale": q.scale,
                "threshold": q.threshold,
                "lossless": q.lossless,
                "max_abs_error": format_rational(q.max_abs_error),
                "tables": [list(t) for t in q.tables],
            },
            "exact": q.lossless,
        }, False

    if cmd == "discretize":
        grids_doc = json.loads(_read(args.grid))
        grids = [[parse_rational(v, "grid") for v in row] for row in grids_doc]
        new_model = discretize_domain(model, grids)
        return {
            "query": "discretize",
            "answer": model_to_dict(new_model),
            "exact": True,
        }, False

    if cmd == "oracle-csr":
        answer = oracle_sufficient(model, instance, _subset(args, model))
        return {"query": "oracle-csr", "answer": answer, "exact": True}, not answer

    if cmd == "oracle-msr":
        size, subset = oracle_min_sufficient(model, instance)
        answer = size <= args.d if args.d is not None else size
        return {
            "query": "oracle-msr",
            "answer": answer,
            "certificate": sorted(subset),
            "cardinality": size,
            "exact": True,
        }, args.d is not None and not (size <= args.d)

    if cmd == "oracle-mcr":
        found = oracle_min_contrastive(model, instance)
        if found is None:
            return {"query": "oracle-mcr", "answer": False, "certificate": None,
                    "exact": True}, True
        size, subset, witness = found
        answer = size <= args.d if args.d is not None else size
        return {
            "query": "oracle-mcr",
            "answer": answer,
            "certificate": sorted(subset),
            "cardinality": size,
            "witness": _witness_doc(witness),
            "exact": True,
        }, args.d is not None and not (size <= args.d)

    if cmd == "oracle-cc":
        value = oracle_cc(model, instance, _subset(args, model))
        return {"query": "oracle-cc", "answer": format_rational(value), "exact": True}, False

    if cmd == "oracle-shap":
        dist = _load_dist(args, model)
        values = oracle_shap_all(model, instance, dist)
        return {
            "query": "oracle-shap",
            "answer": [format_rational(v) for v in values],
            "exact": True,
        }, False

    if cmd == "oracle-fr":
        answer = oracle_redundant(model, args.feature)
        return {"query": "oracle-fr", "answer": answer, "exact": True}, not answer

    raise ValidationError(f"unknown command {cmd!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamx",
        description="Exact explanation queries for generalized additive models",
    )
    parser.add_argument("--version", action="version", version=f"gamx {__version__}")
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text, *, instance=False, subset=False, feature=False,
            d=False, digits=False, dist=False, budget=False, grid=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=name != "gen", help="model document path")
        if instance:
            p.add_argument("--instance", required=True, help="instance document path")
        if subset:
            p.add_argument("--subset", default="", help="feature indices, e.g. '1,3,7'")
        if feature:
            p.add_argument("--feature", type=int, required=True, help="feature index (1-based)")
        if d:
            p.add_argument("--d", type=int, default=None, help="cardinality bound")
        if digits:
            p.add_argument("--digits", type=int, default=6, help="quantization digits")
        if dist:
            p.add_argument("--dist", default=None, help="distribution document path")
        if budget:
            p.add_argument("--budget", type=int, default=DEFAULT_PIECE_BUDGET,
                           help="piecewise canonicalization piece budget")
        if grid:
            p.add_argument("--grid", required=True,
                           help="JSON file: one array of grid values per feature")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--strict-exit", action="store_true",
                       help="exit 1 when a decision query answers No")
        return p

    add("eval", "evaluate the model at an instance", instance=True)
    add("csr", "is the given subset a sufficient reason?", instance=True,
        subset=True, budget=True)
    add("msr", "minimal sufficient reason (decision with --d)", instance=True,
        d=True, budget=True)
    add("mcr", "minimal contrastive reason (decision with --d)", instance=True,
        d=True, budget=True)
    add("fr", "is the feature redundant?", feature=True)
    add("cc", "fraction of completions preserving the prediction", instance=True,
        subset=True, digits=True)
    add("shap", "exact Shapley attributions for all features", instance=True, dist=True)
    add("quantize", "integer tables at the given precision", digits=True)
    add("discretize", "replace domains with enumerable grids", grid=True)

    add("oracle-csr", "brute-force sufficiency check", instance=True, subset=True)
    add("oracle-msr", "brute-force minimal sufficient reason", instance=True, d=True)
    add("oracle-mcr", "brute-force minimal contrastive reason", instance=True, d=True)
    add("oracle-cc", "brute-force completion count", instance=True, subset=True)
    add("oracle-shap", "brute-force Shapley attributions", instance=True, dist=True)
    add("oracle-fr", "brute-force redundancy check", feature=True)

    gen = add("gen", "generate a seeded random model + instance")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--domain-kind", default="enumerable",
                     choices=("enumerable", "int_range", "real_interval"))
    gen.add_argument("--shape", default="spline",
                     choices=("spline", "mlp", "tree_ensemble"))
    gen.add_argument("--task", default="classification",
                     choices=("classification", "regression"))
    gen.add_argument("--values", type=int, default=3, help="enumerable domain size")
    gen.add_argument("--out-model", default=None)
    gen.add_argument("--out-instance", default=None)
    return parser


if __name__ == "__main__":
    sys.exit(main())
