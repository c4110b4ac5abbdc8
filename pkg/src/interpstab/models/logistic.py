import numpy as np

from ..data import Standardizer
from ..exceptions import NonFinite
from ._base import BinaryClassifier, check_binary_xy, log_loss_from_logits, sigmoid


class LogisticModel(BinaryClassifier):
    """L2-regularised logistic regression on internally standardised features.

    Minimises ``mean(log-loss) + l2 / 2 * ||coef||^2`` (intercept unpenalised)
    with damped Newton steps until the gradient norm drops to ``tol``.
    ``coef_`` refers to standardised features, so ``|coef_|`` is directly
    comparable across features.

    Parameters
    ----------
    l2 : float, default=1e-3
    max_iter : int, default=100
    tol : float, default=1e-8
    """

    def __init__(self, l2=1e-3, max_iter=100, tol=1e-8):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    def _objective(self, Z, y, w):
        z = w[0] + Z @ w[1:]
        return log_loss_from_logits(y, z) + 0.5 * self.l2 * float(w[1:] @ w[1:])

    def fit(self, X, y):
        X, y = check_binary_xy(X, y)
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        self.standardizer_ = Standardizer().fit(X)
        Z = self.standardizer_.transform(X)
        n, p = Z.shape
        A = np.column_stack([np.ones(n), Z])
        penalty = np.full(p + 1, self.l2)
        penalty[0] = 0.0

        w = np.zeros(p + 1)
        obj = self._objective(Z, y, w)
        self.n_iter_ = 0
        for it in range(1, self.max_iter + 1):
            mu = sigmoid(A @ w)
            grad = A.T @ (mu - y) / n + penalty * w
            self.grad_norm_ = float(np.linalg.norm(grad))
            if self.grad_norm_ <= self.tol:
                break
            H = (A * (mu * (1 - mu))[:, None]).T @ A / n + np.diag(penalty)
            # tiny ridge keeps H invertible on separable, unpenalised data
            H[np.diag_indices_from(H)] += 1e-12
            step = np.linalg.solve(H, grad)
            t = 1.0
            while True:
                cand = w - t * step
                cand_obj = self._objective(Z, y, cand)
                if cand_obj <= obj + 1e-4 * t * float(grad @ -step) or t < 1e-10:
                    break
                t *= 0.5
            w, obj = cand, cand_obj
            self.n_iter_ = it
            if not np.all(np.isfinite(w)) or not np.isfinite(obj):
                raise NonFinite("logistic fit diverged")
        else:
            mu = sigmoid(A @ w)
            self.grad_norm_ = float(np.linalg.norm(A.T @ (mu - y) / n + penalty * w))

        self.intercept_ = float(w[0])
        self.coef_ = w[1:].copy()
        self.n_features_in_ = p
        return self

    def decision_function(self, X):
        """Logit ``intercept + coef . standardise(x)``."""
        X = self._check_features(X)
        return self.intercept_ + self.standardizer_.transform(X) @ self.coef_

    def _positive_proba(self, X):
        return sigmoid(self.intercept_ + self.standardizer_.transform(X) @ self.coef_)
