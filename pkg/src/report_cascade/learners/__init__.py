from .base import (
    Dataset,
    LearnerError,
    argmax_class,
    check_distribution,
    predict,
    predict_batch,
    predict_proba,
)
from .boosting import GBConfig, GBModel, train_gradient_boosting, training_loss_curve
from .forest import ForestConfig, ForestModel, train_random_forest
from .linear import LinearConfig, LinearModel, train_linear

__all__ = [
    "Dataset",
    "LearnerError",
    "argmax_class",
    "check_distribution",
    "predict",
    "predict_batch",
    "predict_proba",
    "GBConfig",
    "GBModel",
    "train_gradient_boosting",
    "training_loss_curve",
    "ForestConfig",
    "ForestModel",
    "train_random_forest",
    "LinearConfig",
    "LinearModel",
    "train_linear",
]
