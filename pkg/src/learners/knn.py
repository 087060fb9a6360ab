"""k-nearest neighbours vote."""

import numpy as np
from scipy.spatial.distance import cdist

from ..models.errors import LearnerError
from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, register


@register
class Knn(BaseModel):
    family = LearnerFamily.KNN

    def __init__(self, spec, n_features, train_fingerprint, features, labels, warnings=()):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.features = np.asarray(features, dtype=float).reshape(-1, n_features)
        self.labels = np.asarray(labels, dtype=float)

    def _predict(self, X):
        k = self.spec["k"]
        dist = cdist(X, self.features, "euclidean")
        # stable sort: equal distances keep training order
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        d = np.take_along_axis(dist, nearest, axis=1)
        votes = self.labels[nearest]
        if self.spec["weights"] == "uniform":
            return votes.mean(axis=1)
        exact = d == 0.0
        with np.errstate(divide="ignore"):
            weights = np.where(exact.any(axis=1, keepdims=True), exact.astype(float), 1.0 / d)
        return (weights * votes).sum(axis=1) / weights.sum(axis=1)

    def params_dict(self) -> dict:
        return {"features": self.features.tolist(), "labels": self.labels.astype(int).tolist()}

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        return cls(spec, n_features, fingerprint, params["features"], params["labels"])


def fit_knn(spec: LearnerSpec, data: LabeledDataset) -> Knn:
    """Store the training rows; k must not exceed the row count."""
    if spec["k"] > data.n_samples:
        raise LearnerError(f"k = {spec['k']} exceeds the {data.n_samples} training rows")
    return Knn(spec, data.n_features, data.fingerprint(), data.features, data.labels)
