import numpy as np

from ..exceptions import NonFinite
from ._base import BinaryClassifier, check_binary_xy, sigmoid


def _quantile_edges(x, n_bins):
    qs = np.quantile(x, np.linspace(0.0, 1.0, n_bins + 1)[1:-1])
    return np.unique(qs)


class AdditiveModel(BinaryClassifier):
    """Additive logit ``intercept + sum_j f_j(x_j)`` with step-function terms.

    A lightweight explainable-boosting stand-in: features are binned at
    training quantiles, then depth-1 stumps on the residual ``y - p`` are
    boosted one feature at a time in round-robin order for ``n_cycles``
    passes. Afterwards every term is centred on the training data and the
    removed mean moves into the intercept.

    Attributes
    ----------
    bin_edges_ : list of ndarray
        Upper bin boundaries per feature; ``x <= edges[k]`` falls in bin ``k``.
    shape_values_ : list of ndarray
        Term value per bin, one array per feature.
    intercept_ : float
    """

    def __init__(self, n_cycles=50, n_bins=16, learning_rate=0.1):
        self.n_cycles = n_cycles
        self.n_bins = n_bins
        self.learning_rate = learning_rate

    def _bins(self, X):
        return np.column_stack([
            np.searchsorted(edges, X[:, j], side="left")
            for j, edges in enumerate(self.bin_edges_)
        ])

    def fit(self, X, y):
        X, y = check_binary_xy(X, y)
        n, p = X.shape
        self.bin_edges_ = [_quantile_edges(X[:, j], self.n_bins) for j in range(p)]
        B = self._bins(X)
        sizes = [edges.size + 1 for edges in self.bin_edges_]
        shapes = [np.zeros(k) for k in sizes]

        rate = y.mean()
        intercept = float(np.log(rate / (1.0 - rate)))
        F = np.full(n, intercept)
        for _ in range(self.n_cycles):
            for j in range(p):
                delta = self._stump(B[:, j], y - sigmoid(F), sizes[j])
                shapes[j] += self.learning_rate * delta
                F += self.learning_rate * delta[B[:, j]]
        for j in range(p):
            centre = shapes[j][B[:, j]].mean()
            shapes[j] -= centre
            intercept += centre
        if not np.isfinite(intercept) or not all(np.all(np.isfinite(s)) for s in shapes):
            raise NonFinite("additive fit produced non-finite terms")

        self.shape_values_ = shapes
        self.intercept_ = intercept
        self.train_bins_ = B
        self.n_features_in_ = p
        return self

    @staticmethod
    def _stump(bins, residual, size):
        """Per-bin update of the best single-threshold stump on ``residual``."""
        sums = np.bincount(bins, weights=residual, minlength=size)
        counts = np.bincount(bins, minlength=size).astype(float)
        cs, cc = np.cumsum(sums)[:-1], np.cumsum(counts)[:-1]
        total_s, total_c = sums.sum(), counts.sum()
        valid = (cc > 0) & (cc < total_c)
        if not valid.any():
            return np.full(size, total_s / total_c)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = cs ** 2 / cc + (total_s - cs) ** 2 / (total_c - cc)
        k = int(np.argmax(np.where(valid, score, -np.inf)))
        left = cs[k] / cc[k]
        right = (total_s - cs[k]) / (total_c - cc[k])
        return np.where(np.arange(size) <= k, left, right)

    def term_contributions(self, X):
        """Matrix of ``f_j(x_j)`` with one column per feature."""
        X = self._check_features(X)
        return self._terms(self._bins(X))

    def _terms(self, B):
        return np.column_stack([s[B[:, j]] for j, s in enumerate(self.shape_values_)])

    def decision_function(self, X):
        return self.intercept_ + self.term_contributions(X).sum(axis=1)

    def _positive_proba(self, X):
        return sigmoid(self.intercept_ + self._terms(self._bins(X)).sum(axis=1))
