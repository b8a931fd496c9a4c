from .estimator import (
    CostValueEstimator,
    EstimatorConfig,
    EstimatorStats,
    cost_to_go_dataset,
    fit_estimator,
    load_estimator,
    refit_estimator,
    save_estimator,
    suffix_sums,
)
from .switching import SafetyConfig, SafetyGuard, run_guarded_episode, should_switch

__all__ = [
    "CostValueEstimator",
    "EstimatorConfig",
    "EstimatorStats",
    "SafetyConfig",
    "SafetyGuard",
    "cost_to_go_dataset",
    "fit_estimator",
    "load_estimator",
    "refit_estimator",
    "run_guarded_episode",
    "save_estimator",
    "should_switch",
    "suffix_sums",
]
