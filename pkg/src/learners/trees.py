"""CART decision trees and random forests.

Trees are stored as flat node arrays (preorder); a feature of -1 marks a leaf.
Split search sorts each candidate feature once per node and scores every
midpoint from cumulative sums. Equal gains resolve to the lowest feature index,
then the lowest threshold.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..models.errors import LearnerError
from ..models.learner_spec import LabeledDataset, LearnerFamily, LearnerSpec
from ..models.seeds import rng_for
from .base import BaseModel, register

GainFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TreeArrays:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def depth(self) -> int:
        def walk(node: int) -> int:
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))

        return walk(0)

    def to_nested(self, leaf_key: str = "leaf_prob", node: int = 0) -> dict:
        if self.feature[node] < 0:
            return {leaf_key: float(self.value[node])}
        return {
            "feature": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "left": self.to_nested(leaf_key, int(self.left[node])),
            "right": self.to_nested(leaf_key, int(self.right[node])),
        }

    @classmethod
    def from_nested(cls, root: dict, leaf_key: str = "leaf_prob") -> "TreeArrays":
        feature, threshold, left, right, value = [], [], [], [], []

        def add(node: dict) -> int:
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            if leaf_key in node:
                value[i] = float(node[leaf_key])
                return i
            feature[i] = int(node["feature"])
            threshold[i] = float(node["threshold"])
            left[i] = add(node["left"])
            right[i] = add(node["right"])
            return i

        add(root)
        return cls(
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=float),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=float),
        )


def route(trees: Sequence[TreeArrays], X: np.ndarray) -> np.ndarray:
    """Leaf values reached by every row in every tree, shape (n_rows, n_trees)."""
    offsets = np.cumsum([0] + [t.n_nodes for t in trees[:-1]])
    feature = np.concatenate([t.feature for t in trees])
    threshold = np.concatenate([t.threshold for t in trees])
    left = np.concatenate([t.left + off for t, off in zip(trees, offsets)])
    right = np.concatenate([t.right + off for t, off in zip(trees, offsets)])
    value = np.concatenate([t.value for t in trees])

    rows = np.arange(X.shape[0])[:, np.newaxis]
    node = np.broadcast_to(offsets, (X.shape[0], len(trees))).copy()
    while True:
        f = feature[node]
        internal = f >= 0
        if not internal.any():
            break
        go_left = X[rows, np.maximum(f, 0)] <= threshold[node]
        node = np.where(internal, np.where(go_left, left[node], right[node]), node)
    return value[node]


def best_split(
    Xn: np.ndarray, stats: np.ndarray, min_leaf: int, gain_fn: GainFn
) -> Optional[tuple]:
    """
    Exhaustive midpoint search over the columns of `Xn`.

    Args:
        Xn: Node rows restricted to candidate features (n x f), columns in feature order
        stats: Per-row statistics summed on each side (n x s)
        min_leaf: Minimum rows on each side
        gain_fn: (left_sums, right_sums, total_sums, n_left, n_right) -> gain (n-1 x f)

    Returns:
        (column, threshold, gain) of the best valid split, or None
    """
    n = Xn.shape[0]
    if n < 2 * min_leaf or n < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    cum = np.cumsum(stats[order], axis=0)
    total = cum[-1]
    left = cum[:-1]
    right = total[np.newaxis] - left
    n_left = np.arange(1, n, dtype=float)[:, np.newaxis]
    n_right = n - n_left
    gain = gain_fn(left, right, total, n_left, n_right)
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    gain = np.where(valid, gain, -np.inf)
    flat = gain.T.ravel()
    k = int(np.argmax(flat))
    if not np.isfinite(flat[k]):
        return None
    col, pos = divmod(k, n - 1)
    lo, hi = xs[pos, col], xs[pos + 1, col]
    threshold = (lo + hi) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return col, float(threshold), float(flat[k])


def gini_gain(left, right, total, n_left, n_right) -> np.ndarray:
    """Drop in summed Gini impurity, n * gini = 2 * pos * neg / n per node."""
    n = n_left + n_right
    pos_l, pos_r, pos = left[..., 0], right[..., 0], total[..., 0]
    neg_l, neg_r, neg = n_left - pos_l, n_right - pos_r, n - pos
    parent = 2.0 * pos * neg / n
    children = 2.0 * pos_l * neg_l / n_left + 2.0 * pos_r * neg_r / n_right
    return parent - children


class TreeGrower:
    """Recursive CART growth over a fixed training matrix."""

    def __init__(
        self,
        X: np.ndarray,
        stats: np.ndarray,
        max_depth: int,
        min_leaf: int,
        gain_fn: GainFn,
        leaf_fn: Callable[[np.ndarray], float],
        is_pure: Callable[[np.ndarray], bool],
        feature_sampler: Optional[Callable[[], np.ndarray]] = None,
        min_gain: float = -np.inf,
    ):
        self.X = X
        self.stats = stats
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.gain_fn = gain_fn
        self.leaf_fn = leaf_fn
        self.is_pure = is_pure
        self.feature_sampler = feature_sampler or (lambda: np.arange(X.shape[1]))
        self.min_gain = min_gain
        self._feature: List[int] = []
        self._threshold: List[float] = []
        self._left: List[int] = []
        self._right: List[int] = []
        self._value: List[float] = []

    def grow(self, indices: np.ndarray) -> TreeArrays:
        self._grow(np.asarray(indices, dtype=np.int64), 0)
        return TreeArrays(
            np.array(self._feature, dtype=np.int64),
            np.array(self._threshold, dtype=float),
            np.array(self._left, dtype=np.int64),
            np.array(self._right, dtype=np.int64),
            np.array(self._value, dtype=float),
        )

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        node = len(self._feature)
        self._feature.append(-1)
        self._threshold.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._value.append(float(self.leaf_fn(idx)))
        if depth >= self.max_depth or self.is_pure(idx):
            return node

        cols = self.feature_sampler()
        split = best_split(self.X[np.ix_(idx, cols)], self.stats[idx], self.min_leaf, self.gain_fn)
        if split is None or not split[2] > self.min_gain:
            return node
        col, threshold, _ = split
        feature = int(cols[col])
        go_left = self.X[idx, feature] <= threshold
        self._feature[node] = feature
        self._threshold[node] = threshold
        self._left[node] = self._grow(idx[go_left], depth + 1)
        self._right[node] = self._grow(idx[~go_left], depth + 1)
        return node


def grow_classification_tree(
    data: LabeledDataset,
    indices: np.ndarray,
    max_depth: int,
    min_leaf: int,
    feature_sampler: Optional[Callable[[], np.ndarray]] = None,
) -> TreeArrays:
    """Gini tree whose leaves hold the infected frequency of their rows."""
    y = data.labels.astype(float)

    def is_pure(idx):
        s = y[idx].sum()
        return s == 0 or s == idx.size

    grower = TreeGrower(
        data.features,
        y[:, np.newaxis],
        max_depth,
        min_leaf,
        gini_gain,
        leaf_fn=lambda idx: y[idx].mean(),
        is_pure=is_pure,
        feature_sampler=feature_sampler,
    )
    return grower.grow(indices)


@register
class DecisionTree(BaseModel):
    family = LearnerFamily.DECISION_TREE

    def __init__(self, spec, n_features, train_fingerprint, tree: TreeArrays, warnings=()):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.tree = tree

    def _predict(self, X):
        return route([self.tree], X)[:, 0]

    def params_dict(self) -> dict:
        return {"tree": self.tree.to_nested()}

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        return cls(spec, n_features, fingerprint, TreeArrays.from_nested(params["tree"]))


def fit_decision_tree(spec: LearnerSpec, data: LabeledDataset) -> DecisionTree:
    """CART tree with Gini impurity; a single-class set gives a one-leaf tree."""
    tree = grow_classification_tree(
        data, np.arange(data.n_samples), spec["max_depth"], spec["min_leaf"]
    )
    return DecisionTree(spec, data.n_features, data.fingerprint(), tree)


def features_per_split(spec: LearnerSpec, n_features: int) -> int:
    mf = spec["max_features"]
    if mf is None:
        return n_features
    if mf == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    return min(int(mf), n_features)


@register
class RandomForest(BaseModel):
    family = LearnerFamily.RANDOM_FOREST

    def __init__(self, spec, n_features, train_fingerprint, trees: List[TreeArrays], warnings=()):
        super().__init__(spec, n_features, train_fingerprint, warnings)
        self.trees = list(trees)

    def _predict(self, X):
        return route(self.trees, X).mean(axis=1)

    def params_dict(self) -> dict:
        return {"trees": [t.to_nested() for t in self.trees]}

    @classmethod
    def from_params(cls, spec, n_features, fingerprint, params):
        trees = [TreeArrays.from_nested(t) for t in params["trees"]]
        return cls(spec, n_features, fingerprint, trees)


def fit_random_forest(spec: LearnerSpec, data: LabeledDataset) -> RandomForest:
    """Bagged Gini trees with a fresh random feature subset at every split."""
    n, d = data.n_samples, data.n_features
    m = features_per_split(spec, d)
    trees = []
    for t in range(spec["n_trees"]):
        rng = rng_for(spec.seed, "tree", t)
        if spec["bootstrap"]:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        if m >= d:
            sampler = None
        else:
            def sampler(rng=rng):
                return np.sort(rng.choice(d, size=m, replace=False))

        trees.append(
            grow_classification_tree(data, rows, spec["max_depth"], spec["min_leaf"], sampler)
        )
    if not trees:
        raise LearnerError("random forest needs at least one tree")
    return RandomForest(spec, d, data.fingerprint(), trees)
