"""Experiment harness: configuration, norm estimation, runners and output."""

from .config import DEFAULT_BUDGETS, ExperimentConfig, random_family
from .experiments import (
    RUNNERS,
    default_config,
    run_cyclic,
    run_cz,
    run_refinement,
    run_subinequalities,
    run_square_norms,
    run_weighted_lacunary,
)
from .norm import NormEstimate, SquareFunctionOperator, estimate_norm, ratio
from .report import Report, emit

__all__ = [
    "DEFAULT_BUDGETS", "ExperimentConfig", "random_family", "RUNNERS", "default_config",
    "run_cyclic", "run_cz", "run_refinement", "run_subinequalities", "run_square_norms", "run_weighted_lacunary",
    "NormEstimate", "SquareFunctionOperator", "estimate_norm", "ratio", "Report", "emit",
]
