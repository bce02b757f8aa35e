"""Exact explanation queries for generalized additive models.

Sufficiency, contrastive, completion-counting, Shapley, and redundancy
queries over additive models with spline, ReLU-network, or tree-ensemble
components, all in exact rational arithmetic, plus a brute-force oracle for
verification on small instances.
"""

from .errors import (
    BudgetExceededError,
    DomainError,
    GamxError,
    NoContrastiveReasonError,
    ParseError,
    PrecisionError,
    PrecisionWarning,
    QuantizationOverflowError,
    StateSpaceTooLargeError,
    UnsupportedDistributionError,
    UnsupportedTaskError,
    ValidationError,
)
from .model import (
    Component,
    Enumerable,
    FeatureSubset,
    GamModel,
    Instance,
    IntegerRange,
    MlpShape,
    RealInterval,
    SplineShape,
    Task,
    TreeEnsembleShape,
    TreeLeaf,
    TreeSplit,
    discretize_domain,
    evaluate,
    evaluate_component,
    load_instance,
    load_model,
    make_subset,
    serialize_instance,
    serialize_model,
    step,
)
from .distributions import (
    Categorical,
    PiecewiseDensity,
    ProductDistribution,
    UniformInt,
    UniformReal,
    load_distribution,
    uniform_for,
)
from .piecewise import (
    DEFAULT_PIECE_BUDGET,
    Extremes,
    PiecewiseFunction,
    canonicalize,
    component_values,
    expectation,
    extremes,
    extremum_candidates,
)
from .sufficiency import (
    FeatureScore,
    ReasonCertificate,
    ReasonKind,
    check_sufficient,
    feature_scores,
    mcr_decision,
    minimal_contrastive,
    minimal_sufficient,
    msr_decision,
)
from .counting import (
    BoundedCount,
    QuantizedModel,
    ReachTable,
    ReachableSums,
    count_completions,
    expected_label,
    lossless_scale,
    quantize,
    quantize_lossless,
    quantize_with_scale,
    reachable_sums,
)
from .redundancy import (
    RedundancyResult,
    RedundancyWitness,
    is_redundant_continuous,
    is_redundant_discrete,
)
from .shapval import ShapResult, shap_all, shap_classification, shap_regression
from .oracle import (
    oracle_cc,
    oracle_min_contrastive,
    oracle_min_sufficient,
    oracle_redundant,
    oracle_shap,
    oracle_shap_all,
    oracle_sufficient,
)
from .generate import gen_documents, gen_model, random_categorical_doc

__version__ = "0.1.0"
