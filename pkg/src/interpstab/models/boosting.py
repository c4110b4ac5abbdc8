import numpy as np

from ..exceptions import NonFinite
from ._base import BinaryClassifier, check_binary_xy, log_loss_from_logits, sigmoid
from .tree import build_tree


class BoostedModel(BinaryClassifier):
    """First-order gradient boosting of regression trees under logistic loss.

    Each round fits a squared-error tree to the residual ``y - p`` and adds
    ``learning_rate`` times its leaf means to the logit. There are no
    second-order leaf corrections and no column subsampling, so the fit is
    deterministic given the data.

    Parameters
    ----------
    n_estimators : int, default=100
        Boosting rounds; 0 gives the constant base-rate model.
    learning_rate : float, default=0.1
    max_depth : int, default=3
    min_samples_split : int, default=5
    """

    def __init__(self, n_estimators=100, learning_rate=0.1, max_depth=3,
                 min_samples_split=5):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split

    def fit(self, X, y):
        X, y = check_binary_xy(X, y)
        rate = y.mean()
        self.init_ = float(np.log(rate / (1.0 - rate)))
        F = np.full(y.size, self.init_)
        self.estimators_ = []
        self.train_loss_ = [log_loss_from_logits(y, F)]
        for _ in range(self.n_estimators):
            residual = y - sigmoid(F)
            tree = build_tree(X, y, residual, criterion="mse",
                              max_depth=self.max_depth,
                              min_samples_split=self.min_samples_split)
            if not np.all(np.isfinite(tree.value)):
                raise NonFinite("non-finite leaf value in boosting round")
            F = F + self.learning_rate * tree.predict(X)
            self.estimators_.append(tree)
            self.train_loss_.append(log_loss_from_logits(y, F))
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        X = self._check_features(X)
        return self._raw(X)

    def _raw(self, X):
        F = np.full(X.shape[0], self.init_)
        for tree in self.estimators_:
            F += self.learning_rate * tree.predict(X)
        return F

    def _positive_proba(self, X):
        return sigmoid(self._raw(X))
