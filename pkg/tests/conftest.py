import json
from fractions import Fraction

import pytest

from gamx.model import GamModel, Instance, load_model


def identity_model(beta0, betas, domains, task="classification") -> GamModel:
    """Linear model: identity spline per feature over the domain hull."""
    def hull(dom):
        if dom["kind"] == "enumerable":
            vals = [Fraction(v) for v in dom["values"]]
            return min(vals), max(vals)
        return Fraction(dom["lo"]), Fraction(dom["hi"])

    components = []
    for beta, dom in zip(betas, domains):
        lo, hi = hull(dom)
        if lo == hi:
            hi = lo + 1
        components.append(
            {
                "beta": str(beta),
                "shape": {
                    "kind": "spline",
                    "knots": [str(lo), str(hi)],
                    "polys": [["1", "0"]],
                },
            }
        )
    doc = {
        "task": task,
        "beta0": str(beta0),
        "components": components,
        "domains": domains,
    }
    return load_model(json.dumps(doc))


def binary_domains(k):
    return [{"kind": "enumerable", "values": [0, 1]} for _ in range(k)]


def inst(*values) -> Instance:
    return Instance(tuple(Fraction(v) for v in values))


@pytest.fixture
def unit_two_feature():
    """beta0=-1, unit identity components over {0,1}^2."""
    return identity_model(-1, [1, 1], binary_domains(2))
