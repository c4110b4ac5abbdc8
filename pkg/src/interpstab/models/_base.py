import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import WidthMismatch


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss_from_logits(y, z):
    # log(1 + e^z) - y z, written to avoid overflow
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def check_binary_xy(X, y):
    X, y = check_X_y(X, y, dtype=float)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return X, y.astype(float)


class BinaryClassifier(ClassifierMixin, BaseEstimator):
    """Shared predict/validation for the binary models in this package.

    Subclasses implement ``fit`` (setting ``n_features_in_``) and
    ``_positive_proba``.
    """

    classes_ = np.array([0, 1])

    def _check_features(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise WidthMismatch(
                f"{type(self).__name__} expects {self.n_features_in_} "
                f"features, got {X.shape[1]}")
        return X

    def predict_proba(self, X):
        p = self._positive_proba(self._check_features(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
