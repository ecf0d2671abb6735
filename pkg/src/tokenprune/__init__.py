"""Importance- and diversity-aware token subset selection.

Prunes N feature vectors down to K by greedy strategies that trade off
per-token importance against subset diversity (pure importance, farthest
point sampling, a two-stage hybrid, maximal marginal relevance, and a
DPP greedy MAP), plus the diagnostics needed to compare them on the
hopkins/retention plane.
"""

from .core import (
    DEFAULT_EPSILON,
    FeatureMatrix,
    MaxSimState,
    Selection,
    as_importance,
    cosine_similarity,
    normalize_importance,
    similarity_row,
)
from .errors import (
    BudgetError,
    DegenerateGeometryError,
    DegenerateVectorError,
    DomainError,
    FormatError,
    KernelConditioningError,
    PairingError,
    TokenPruneError,
    UndefinedRatioError,
    ValidationError,
)
from .metrics import (
    AngleHistogram,
    DominanceReport,
    HopkinsConfig,
    TradeoffPoint,
    angle_histogram,
    dominance_report,
    dominates,
    hopkins_statistic,
    importance_retention,
    pareto_frontier,
)
from .selectors import (
    ALL_METHODS,
    LAMBDA_METHODS,
    SelectorConfig,
    greedy_map_logdet,
    run_selector,
    select_dpp,
    select_fps,
    select_greedy_importance,
    select_mmr,
    select_mmr_naive,
    select_naive_hybrid,
)
from .synth import Manifold, ManifoldSpec, generate_manifold

__version__ = "0.1.0"

__all__ = [
    "ALL_METHODS",
    "AngleHistogram",
    "BudgetError",
    "DEFAULT_EPSILON",
    "DegenerateGeometryError",
    "DegenerateVectorError",
    "DominanceReport",
    "DomainError",
    "FeatureMatrix",
    "FormatError",
    "HopkinsConfig",
    "KernelConditioningError",
    "LAMBDA_METHODS",
    "Manifold",
    "ManifoldSpec",
    "MaxSimState",
    "PairingError",
    "Selection",
    "SelectorConfig",
    "TokenPruneError",
    "TradeoffPoint",
    "UndefinedRatioError",
    "ValidationError",
    "angle_histogram",
    "as_importance",
    "cosine_similarity",
    "dominance_report",
    "dominates",
    "generate_manifold",
    "greedy_map_logdet",
    "hopkins_statistic",
    "importance_retention",
    "normalize_importance",
    "pareto_frontier",
    "run_selector",
    "select_dpp",
    "select_fps",
    "select_greedy_importance",
    "select_mmr",
    "select_mmr_naive",
    "select_naive_hybrid",
    "similarity_row",
    "__version__",
]
