"""Feature-importance explainers and rank extraction.

Every explainer returns scores whose magnitudes order the features. Rank
vectors list feature indices most-important first, with ties going to the
lower index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateSamples,
    EmptyBackground,
    TooManyFeatures,
    WidthMismatch,
)
from .models import AdditiveModel, DecisionTree, LogisticModel, Tree

EXACT_MAX_FEATURES = 15

# Upper bound on hybrid rows evaluated per model call.
_BATCH_ROWS = 200_000


@dataclass(frozen=True, eq=False)
class ImportanceVector:
    scores: np.ndarray
    scope: str = "global"
    instance: int | None = None

    def ranks(self):
        return rank_features(self.scores)


def rank_features(scores):
    """Feature indices by descending score; equal scores keep index order."""
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise ValueError("importance scores must be finite")
    return tuple(int(i) for i in np.argsort(-scores, kind="stable"))


def model_output(model, X):
    """Quantity explained for ``model``.

    Logistic models are explained on the logit scale, every other model on
    the class-1 probability. Plain callables are evaluated directly.
    """
    X = np.asarray(X, dtype=float)
    if isinstance(model, LogisticModel):
        return model.decision_function(X)
    if hasattr(model, "predict_proba"):
        return model.predict_proba(X)[:, 1]
    return np.asarray(model(X), dtype=float)


# -- coefficient magnitude -------------------------------------------------

def rcm_global(model):
    return ImportanceVector(np.abs(np.asarray(model.coef_, dtype=float)), "global")


def rcm_local(model, x, instance=None):
    """``|coef_j * x_j|`` for an already standardised instance ``x``."""
    coef = np.asarray(model.coef_, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if x.size != coef.size:
        raise WidthMismatch(f"expected {coef.size} features, got {x.size}")
    return ImportanceVector(np.abs(coef * x), "local", instance)


# -- impurity decrease -----------------------------------------------------

def _trees_of(model):
    if isinstance(model, Tree):
        return [model]
    if isinstance(model, DecisionTree):
        return [model.tree_]
    if hasattr(model, "estimators_"):
        return list(model.estimators_)
    raise TypeError(f"{type(model).__name__} is not a tree model")


def tree_impurity_decrease(tree, n_features):
    """Per-feature sum of ``n_node / n_root * (gini - weighted child gini)``."""
    out = np.zeros(n_features)
    n_root = tree.n_node[0]
    for i in np.flatnonzero(tree.feature >= 0):
        l, r = tree.left[i], tree.right[i]
        n = tree.n_node[i]
        child = (tree.n_node[l] * tree.impurity[l]
                 + tree.n_node[r] * tree.impurity[r]) / n
        out[tree.feature[i]] += n / n_root * (tree.impurity[i] - child)
    return out


def mdi_global(model, n_features=None):
    """Mean decrease in Gini impurity, averaged over trees and summing to 1.

    Returns all zeros when no tree has a split.
    """
    trees = _trees_of(model)
    if n_features is None:
        n_features = model.n_features_in_
    scores = np.mean([tree_impurity_decrease(t, n_features) for t in trees], axis=0)
    total = scores.sum()
    if total > 0:
        scores = scores / total
    return ImportanceVector(scores, "global")


# -- Shapley values --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShapleyExplanation:
    base_value: float
    values: np.ndarray
    instance: int | None = None
    mode: str = "exact"
    n_permutations: int | None = None

    def importance(self):
        return ImportanceVector(np.abs(self.values), "local", self.instance)


def _check_background(background, n_features):
    bg = np.asarray(getattr(background, "X", background), dtype=float)
    if bg.ndim != 2 or bg.shape[0] == 0:
        raise EmptyBackground("background must contain at least one row")
    if bg.shape[1] != n_features:
        raise WidthMismatch(
            f"background has {bg.shape[1]} features, instance has {n_features}")
    return bg


def coalition_values(model, x, background, masks):
    """Interventional value of each coalition in ``masks``.

    ``masks`` is a boolean array (n_coalitions, P). A coalition's value is
    the mean model output over background rows with the coalition's
    features overwritten by ``x``.
    """
    masks = np.asarray(masks, dtype=bool)
    n_bg, p = background.shape
    chunk = max(1, _BATCH_ROWS // n_bg)
    out = np.empty(masks.shape[0])
    for start in range(0, masks.shape[0], chunk):
        m = masks[start:start + chunk]
        hybrid = np.where(m[:, None, :], x[None, None, :], background[None, :, :])
        f = model_output(model, hybrid.reshape(-1, p))
        out[start:start + chunk] = f.reshape(m.shape[0], n_bg).mean(axis=1)
    return out


def _bit_masks(codes, p):
    return ((np.asarray(codes)[:, None] >> np.arange(p)) & 1).astype(bool)


def shap_exact(model, x, background, instance=None, max_features=EXACT_MAX_FEATURES):
    """Shapley values by enumerating all ``2^P`` coalitions.

    ``phi_i`` sums ``|S|! (P-|S|-1)! / P!`` times the marginal contribution
    ``v(S + i) - v(S)`` over coalitions ``S`` not containing ``i``.
    """
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    if p > max_features:
        raise TooManyFeatures(f"{p} features exceeds the exact-mode cap of {max_features}")
    bg = _check_background(background, p)
    codes = np.arange(2 ** p)
    v = coalition_values(model, x, bg, _bit_masks(codes, p))
    sizes = np.array([bin(c).count("1") for c in codes])
    weight = np.array([math.factorial(s) * math.factorial(p - s - 1) / math.factorial(p)
                       for s in range(p)])
    phi = np.empty(p)
    for i in range(p):
        without = codes[(codes >> i) & 1 == 0]
        phi[i] = np.sum(weight[sizes[without]] * (v[without | (1 << i)] - v[without]))
    return ShapleyExplanation(float(v[0]), phi, instance, "exact")


def shap_sampled(model, x, background, n_permutations=500, seed=None,
                 instance=None, permutations=None):
    """Monte Carlo Shapley values averaged over random feature orderings.

    Each ordering adds features one at a time and credits each with its
    marginal contribution. Pass ``permutations`` to use a fixed list of
    orderings instead of drawing ``n_permutations`` of them.
    """
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    bg = _check_background(background, p)
    if permutations is None:
        if n_permutations < 1:
            raise ValueError("n_permutations must be at least 1")
        rng = np.random.default_rng(seed)
        perms = np.array([rng.permutation(p) for _ in range(n_permutations)])
    else:
        perms = np.asarray(permutations, dtype=np.int64).reshape(-1, p)
    # prefix coalition codes along every ordering
    steps = np.left_shift(1, perms)
    prefix = np.concatenate([np.zeros((perms.shape[0], 1), dtype=np.int64),
                             np.cumsum(steps, axis=1)], axis=1)
    unique, inverse = np.unique(prefix, return_inverse=True)
    v = coalition_values(model, x, bg, _bit_masks(unique, p))[inverse.reshape(prefix.shape)]
    gains = np.diff(v, axis=1)
    phi = np.zeros(p)
    np.add.at(phi, perms.ravel(), gains.ravel())
    phi /= perms.shape[0]
    return ShapleyExplanation(float(v[0, 0]), phi, instance, "sampled", perms.shape[0])


def all_permutations(p):
    return np.array(list(itertools.permutations(range(p))))


def shap_global(model, instances, background, mode="exact", n_permutations=500,
                seed=None, max_features=EXACT_MAX_FEATURES):
    """Mean absolute Shapley value per feature over ``instances``."""
    X = np.atleast_2d(np.asarray(getattr(instances, "X", instances), dtype=float))
    if X.shape[0] == 0:
        raise ValueError("need at least one instance")
    rng = np.random.default_rng(seed)
    phis = []
    for k, x in enumerate(X):
        if mode == "exact":
            e = shap_exact(model, x, background, k, max_features=max_features)
        else:
            e = shap_sampled(model, x, background, n_permutations,
                             seed=rng.integers(2**63), instance=k)
        phis.append(np.abs(e.values))
    return ImportanceVector(np.mean(phis, axis=0), "global")


# -- LIME ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LimeExplanation:
    intercept: float
    coef: np.ndarray
    kernel_width: float
    n_samples: int
    instance: int | None = None

    def importance(self):
        return ImportanceVector(np.abs(self.coef), "local", self.instance)


def weighted_ridge(Z, target, weights, alpha):
    """Weighted least squares with an unpenalised intercept."""
    w = weights / weights.sum()
    z_mean = w @ Z
    t_mean = w @ target
    Zc = Z - z_mean
    tc = target - t_mean
    A = (Zc * w[:, None]).T @ Zc + alpha / weights.sum() * np.eye(Z.shape[1])
    coef = np.linalg.solve(A, (Zc * w[:, None]).T @ tc)
    return float(t_mean - z_mean @ coef), coef


def lime_local(model, x, background, n_samples=1000, kernel_width=None,
               ridge=1.0, seed=None, instance=None):
    """Weighted ridge surrogate over random feature-presence patterns.

    Each sample switches features on or off uniformly at random; switched-off
    features take the background column mean. Samples are weighted by
    ``exp(-h^2 / width^2)`` where ``h`` counts the switched-off features,
    and the class-1 probability is regressed on the presence indicators.

    Parameters
    ----------
    kernel_width : float, optional
        Defaults to ``0.75 * sqrt(P)``.
    ridge : float, default=1.0
        Penalty on the surrogate coefficients (the complexity term).
    """
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    bg = _check_background(background, p)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    width = 0.75 * math.sqrt(p) if kernel_width is None else float(kernel_width)
    rng = np.random.default_rng(seed)
    Z = rng.integers(0, 2, size=(n_samples, p)).astype(bool)
    if np.all(Z == Z[0]):
        raise DegenerateSamples("all presence samples are identical")
    hybrid = np.where(Z, x, bg.mean(axis=0))
    if hasattr(model, "predict_proba"):
        target = model.predict_proba(hybrid)[:, 1]
    else:
        target = model_output(model, hybrid)
    h = p - Z.sum(axis=1)
    weights = np.exp(-(h ** 2) / width ** 2)
    intercept, coef = weighted_ridge(Z.astype(float), target, weights, ridge)
    return LimeExplanation(intercept, coef, width, n_samples, instance)


# -- additive self-explanation ---------------------------------------------

def additive_explain(model: AdditiveModel, x=None, instance=None):
    """``|f_j(x_j)|`` for one instance, or its training-set mean when ``x`` is None."""
    if x is None:
        terms = model._terms(model.train_bins_)
        return ImportanceVector(np.abs(terms).mean(axis=0), "global")
    terms = model.term_contributions(np.atleast_2d(x))[0]
    return ImportanceVector(np.abs(terms), "local", instance)
