"""Shot trajectories to make probabilities and Rao-Blackwellized shooting estimates."""

from ._core import (
    ShotrbError,
    ProbModel,
    measure_shot,
    trajectory,
    sample_factors,
    expand_factors,
    train_logistic,
    score_brier,
    score_logloss,
    score_misclassification,
    raw_fg_pct,
    rb_fg_pct,
    fit_beta_mle,
    shrink_estimate,
    raw_variance,
    rb_variance,
    normal_ci,
    default_config,
    run_pipeline,
)

__all__ = [
    "ShotrbError",
    "ProbModel",
    "measure_shot",
    "trajectory",
    "sample_factors",
    "expand_factors",
    "train_logistic",
    "score_brier",
    "score_logloss",
    "score_misclassification",
    "raw_fg_pct",
    "rb_fg_pct",
    "fit_beta_mle",
    "shrink_estimate",
    "raw_variance",
    "rb_variance",
    "normal_ci",
    "default_config",
    "run_pipeline",
]
