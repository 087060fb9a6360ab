"""From-scratch base learners sharing one fit / predict_proba contract."""

from typing import Callable, Dict

import numpy as np

from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, model_from_dict
from .boosting import fit_boosted_trees
from .knn import fit_knn
from .logistic import fit_logreg
from .naive_bayes import fit_gaussian_nb
from .svm import fit_svm_rbf
from .trees import fit_decision_tree, fit_random_forest

FITTERS: Dict[LearnerFamily, Callable[[LearnerSpec, LabeledDataset], BaseModel]] = {
    LearnerFamily.DECISION_TREE: fit_decision_tree,
    LearnerFamily.RANDOM_FOREST: fit_random_forest,
    LearnerFamily.BOOSTED_TREES: fit_boosted_trees,
    LearnerFamily.SVM_RBF: fit_svm_rbf,
    LearnerFamily.GAUSSIAN_NB: fit_gaussian_nb,
    LearnerFamily.KNN: fit_knn,
    LearnerFamily.LOGREG: fit_logreg,
}


def fit_model(spec: LearnerSpec, data: LabeledDataset) -> BaseModel:
    """Fit the learner family named by `spec`."""
    return FITTERS[spec.family](spec, data)


def predict_proba(model: BaseModel, features) -> np.ndarray:
    return model.predict_proba(features)


__all__ = [
    "BaseModel",
    "FITTERS",
    "fit_model",
    "predict_proba",
    "model_from_dict",
    "fit_decision_tree",
    "fit_random_forest",
    "fit_boosted_trees",
    "fit_svm_rbf",
    "fit_gaussian_nb",
    "fit_knn",
    "fit_logreg",
]
