"""Gaussian naive Bayes."""

import numpy as np
from scipy.special import expit

from ..models.errors import LearnerError
from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, register


@register
class GaussianNB(BaseModel):
    family = LearnerFamily.GAUSSIAN_NB

    def __init__(self, spec, n_features, train_fingerprint, log_prior, mean, var, warnings=()):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.log_prior = np.asarray(log_prior, dtype=float)
        self.mean = np.asarray(mean, dtype=float)
        self.var = np.asarray(var, dtype=float)

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        """(n x 2) log prior + sum of per-feature Gaussian log densities."""
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            quad = -0.5 * np.sum((X - self.mean[c]) ** 2 / self.var[c], axis=1)
            out[:, c] = self.log_prior[c] + log_norm + quad
        return out

    def _predict(self, X):
        joint = self.joint_log_likelihood(X)
        # normalised two-class posterior; logistic of the log ratio stays finite
        return expit(joint[:, 1] - joint[:, 0])

    def params_dict(self) -> dict:
        return {
            "log_prior": self.log_prior.tolist(),
            "mean": self.mean.tolist(),
            "var": self.var.tolist(),
        }

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        return cls(
            spec, n_features, fingerprint, params["log_prior"], params["mean"], params["var"]
        )


def fit_gaussian_nb(spec: LearnerSpec, data: LabeledDataset) -> GaussianNB:
    """Per-class feature means and population variances plus a smoothing floor.

    The floor is var_smoothing times the largest feature variance (or times 1
    when every feature is constant).
    """
    X, y = data.features, data.labels
    if not data.has_both_classes:
        raise LearnerError("gaussian_nb needs both classes")
    largest = float(X.var(axis=0).max())
    epsilon = spec["var_smoothing"] * (largest if largest > 0 else 1.0)
    mean = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
    var = np.vstack([X[y == c].var(axis=0) for c in (0, 1)]) + epsilon
    if np.any(var <= 0):
        raise LearnerError("zero feature variance; set var_smoothing > 0")
    log_prior = np.log(np.array([np.mean(y == 0), np.mean(y == 1)]))
    return GaussianNB(spec, data.n_features, data.fingerprint(), log_prior, mean, var)
