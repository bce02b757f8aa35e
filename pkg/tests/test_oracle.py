import json
import random
from fractions import Fraction

import pytest

from conftest import binary_domains, identity_model, inst

from gamx.distributions import load_distribution
from gamx.errors import StateSpaceTooLargeError
from gamx.generate import gen_model, random_categorical_doc
from gamx.model import evaluate
from gamx.oracle import (
    oracle_cc,
    oracle_min_contrastive,
    oracle_min_sufficient,
    oracle_redundant,
    oracle_shap_all,
    oracle_sufficient,
)


def test_sufficient_iff_count_is_one():
    rng = random.Random(41)
    for seed in range(15):
        model, x = gen_model(seed, 4, domain_kind="enumerable", shape_kind="mlp")
        for _ in range(5):
            subset = frozenset(i for i in range(1, 5) if rng.random() < 0.5)
            assert oracle_sufficient(model, x, subset) == (
                oracle_cc(model, x, subset) == 1
            )


def test_min_sufficient_and_contrastive_duality():
    for seed in range(15):
        model, x = gen_model(seed, 4, domain_kind="enumerable", shape_kind="spline")
        size, subset = oracle_min_sufficient(model, x)
        assert oracle_sufficient(model, x, subset)
        for smaller in range(size):
            pass  # minimality is guaranteed by construction (sizes scanned ascending)
        found = oracle_min_contrastive(model, x)
        if found:
            _, chosen, witness = found
            assert evaluate(model, witness) != evaluate(model, x)
            complement = frozenset(range(1, model.k + 1)) - chosen
            assert not oracle_sufficient(model, x, complement)


def test_shapley_axioms_exact():
    for seed in range(10):
        model, x = gen_model(seed, 4, domain_kind="enumerable", shape_kind="tree_ensemble")
        dist = load_distribution(json.dumps(random_categorical_doc(seed, model)), model)
        values = oracle_shap_all(model, x, dist)
        # efficiency against definitional v(full) - v(empty)
        full = Fraction(evaluate(model, x))
        baseline = oracle_cc_expectation(model, dist)
        assert sum(values) == full - baseline


def oracle_cc_expectation(model, dist):
    import itertools

    from gamx.model import Instance

    total = Fraction(0)
    domains = [d.values for d in model.domains]
    for combo in itertools.product(*domains):
        p = Fraction(1)
        for i, v in enumerate(combo, start=1):
            marg = dist.marginal(i)
            p *= marg.probs[model.domain(i).values.index(v)]
        total += p * evaluate(model, Instance(combo))
    return total


def test_dummy_and_symmetry_axioms():
    m = identity_model(-1, [1, 1, 0], binary_domains(3))
    values = oracle_shap_all(m, inst(1, 1, 0))
    assert values[2] == 0
    assert values[0] == values[1]


def test_redundant_feature_detected():
    m = identity_model(-1, [1, 0], binary_domains(2))
    assert oracle_redundant(m, 2)
    assert not oracle_redundant(m, 1)


def test_ceiling_is_hard(monkeypatch):
    model, x = gen_model(0, 4, domain_kind="enumerable", shape_kind="spline", n_values=4)
    monkeypatch.setenv("GAMX_ORACLE_CEILING", "100")
    with pytest.raises(StateSpaceTooLargeError):
        oracle_sufficient(model, x, [1])
    monkeypatch.setenv("GAMX_ORACLE_CEILING", "1000000")
    oracle_sufficient(model, x, [1])
