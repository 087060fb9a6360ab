"""Second-order gradient boosted trees on the logistic loss."""

import math
from typing import List

import numpy as np
from scipy.special import expit

from ..models.errors import LearnerError
from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from .base import BaseModel, register
from .trees import TreeArrays, TreeGrower, route


def log_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean logistic loss of labels against log-odds."""
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def newton_gain(l2_lambda: float):
    def gain(left, right, total, n_left, n_right):
        g_l, h_l = left[..., 0], left[..., 1]
        g_r, h_r = right[..., 0], right[..., 1]
        g, h = total[..., 0], total[..., 1]
        return 0.5 * (
            g_l**2 / (h_l + l2_lambda) + g_r**2 / (h_r + l2_lambda) - g**2 / (h + l2_lambda)
        )

    return gain


@register
class BoostedTrees(BaseModel):
    family = LearnerFamily.BOOSTED_TREES

    def __init__(
        self,
        spec,
        n_features,
        train_fingerprint,
        base_score: float,
        trees: List[TreeArrays],
        train_loss: List[float],
        warnings=(),
    ):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.base_score = float(base_score)
        self.trees = list(trees)
        self.train_loss = list(train_loss)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        margin = np.full(X.shape[0], self.base_score)
        if self.trees:
            margin = margin + self.spec["learning_rate"] * route(self.trees, X).sum(axis=1)
        return margin

    def _predict(self, X):
        return expit(self.decision_function(X))

    def params_dict(self) -> dict:
        return {
            "base_score": self.base_score,
            "trees": [t.to_nested("leaf_value") for t in self.trees],
            "train_loss": list(self.train_loss),
        }

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        trees = [TreeArrays.from_nested(t, "leaf_value") for t in params["trees"]]
        return cls(
            spec, n_features, fingerprint, params["base_score"], trees, params["train_loss"]
        )


def fit_boosted_trees(spec: LearnerSpec, data: LabeledDataset) -> BoostedTrees:
    """
    Newton boosting: each round fits a regression tree to the loss gradients.

    Leaf weights are -sum(g) / (sum(h) + l2_lambda) and the margin moves by
    learning_rate times the tree output. The starting margin is the training log-odds.
    """
    y = data.labels.astype(float)
    prior = float(y.mean())
    if prior in (0.0, 1.0):
        raise LearnerError("degenerate prior: boosted trees need both classes")
    base_score = math.log(prior / (1.0 - prior))
    lam = float(spec["l2_lambda"])
    lr = float(spec["learning_rate"])

    X = data.features
    rows = np.arange(data.n_samples)
    margin = np.full(data.n_samples, base_score)
    losses = [log_loss(y, margin)]
    trees = []
    for _ in range(spec["n_rounds"]):
        p = expit(margin)
        stats = np.column_stack([p - y, p * (1.0 - p)])
        grower = TreeGrower(
            X,
            stats,
            spec["max_depth"],
            spec["min_leaf"],
            newton_gain(lam),
            leaf_fn=lambda idx, s=stats: -s[idx, 0].sum() / (s[idx, 1].sum() + lam),
            is_pure=lambda idx: idx.size < 2,
            min_gain=0.0,
        )
        tree = grower.grow(rows)
        trees.append(tree)
        margin = margin + lr * route([tree], X)[:, 0]
        losses.append(log_loss(y, margin))
    return BoostedTrees(spec, data.n_features, data.fingerprint(), base_score, trees, losses)
