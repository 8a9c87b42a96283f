"""Agnostic regression for on-average-smooth functions over metric spaces.

The package provides finite metric spaces with nets and covering numbers
(:mod:`avgsmooth.metric`), empirical smoothness and Holder seminorms
(:mod:`avgsmooth.smoothness`), the approximate Holder extension predictor
(:mod:`avgsmooth.extension`), the LP-relabeling learner
(:mod:`avgsmooth.learner`), evaluable generalization-bound formulas with
brute-force oracles (:mod:`avgsmooth.bounds`), seeded synthetic scenarios
(:mod:`avgsmooth.synthetic`), and the experiment CLI (:mod:`avgsmooth.cli`).
"""

from .extension import ExtensionModel, fit_extension, predict, predict_many
from .learner import LearnerConfig, Schedule, build_lp, learn, required_sample_size, solve_lp
from .metric import FiniteMetric, Net, covering_number, greedy_net, interval_cover_bound
from .smoothness import (
    LabeledSample,
    SlopeProfile,
    empirical_smoothness,
    holder_seminorm,
    point_slope,
)
from .synthetic import Scenario, bayes_risk, sample, true_average_smoothness

__all__ = [
    "ExtensionModel",
    "FiniteMetric",
    "LabeledSample",
    "LearnerConfig",
    "Net",
    "Scenario",
    "Schedule",
    "SlopeProfile",
    "bayes_risk",
    "build_lp",
    "covering_number",
    "empirical_smoothness",
    "fit_extension",
    "greedy_net",
    "holder_seminorm",
    "interval_cover_bound",
    "learn",
    "point_slope",
    "predict",
    "predict_many",
    "required_sample_size",
    "sample",
    "solve_lp",
    "true_average_smoothness",
]

__version__ = "0.1.0"
