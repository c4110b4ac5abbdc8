import math

import numpy as np

from ._base import BinaryClassifier, check_binary_xy
from .tree import build_tree


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if isinstance(max_features, float):
        return max(1, math.ceil(max_features * n_features))
    return max(1, min(int(max_features), n_features))


class ForestModel(BinaryClassifier):
    """Bagged Gini trees with per-split random column subsets.

    Tree ``b`` is grown on ``estimators_samples_[b]``, a size-n draw with
    replacement. The forest probability is the plain mean of the trees'
    leaf probabilities.

    Parameters
    ----------
    n_estimators : int, default=100
    max_features : {"sqrt"}, int, float or None, default="sqrt"
        ``"sqrt"`` means ``ceil(sqrt(n_features))``; ``None`` uses all columns.
    max_depth : int, default=8
    min_samples_split : int, default=5
    random_state : int or None
    """

    def __init__(self, n_estimators=100, max_features="sqrt", max_depth=8,
                 min_samples_split=5, random_state=None):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_binary_xy(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be at least 1")
        n, p = X.shape
        m = resolve_max_features(self.max_features, p)
        rng = np.random.default_rng(self.random_state)
        self.estimators_, self.estimators_samples_ = [], []
        for _ in range(self.n_estimators):
            rows = rng.integers(0, n, size=n)
            tree_rng = np.random.default_rng(rng.integers(2**63))
            self.estimators_.append(build_tree(
                X[rows], y[rows], criterion="gini", max_depth=self.max_depth,
                min_samples_split=self.min_samples_split, max_features=m,
                rng=tree_rng))
            self.estimators_samples_.append(rows)
        self.max_features_ = m
        self.n_features_in_ = p
        return self

    def _positive_proba(self, X):
        return np.mean([t.predict(X) for t in self.estimators_], axis=0)
