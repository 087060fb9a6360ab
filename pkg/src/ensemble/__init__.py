"""Data splitting, out-of-fold predictions, model selection and stacking."""

from .oof import assign_folds, compute_oof
from .selection import auc_score, prediction_correlation, select_from_oof, select_models
from .splitting import stratified_split
from .stacking import StackedEnsemble, fit_stacked, predict

__all__ = [
    "assign_folds",
    "auc_score",
    "compute_oof",
    "fit_stacked",
    "predict",
    "prediction_correlation",
    "select_from_oof",
    "select_models",
    "StackedEnsemble",
    "stratified_split",
]
