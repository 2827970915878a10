"""Adaptive fusion of segmentation losses from their recent history."""

from .bilateral import BilateralConfig, bilateral_filter
from .controller import (Controller, ControllerConfig, DecaySchedule, LossHistory,
                         Strategy, bayesian_weights, mad_weights, normalize_history,
                         variance_weights)
from .harness import RunConfig, compare, generate_dataset, replay, summary_table, train
from .losses import LossConfig, loss_gradient, loss_value, soft_counts, softmax
from .metrics import evaluate, hard_counts

__all__ = [
    "BilateralConfig", "bilateral_filter",
    "Controller", "ControllerConfig", "DecaySchedule", "LossHistory", "Strategy",
    "bayesian_weights", "mad_weights", "normalize_history", "variance_weights",
    "RunConfig", "compare", "generate_dataset", "replay", "summary_table", "train",
    "LossConfig", "loss_gradient", "loss_value", "soft_counts", "softmax",
    "evaluate", "hard_counts",
]
