"""Greedy CART trees stored as flat node arrays.

Classification trees split on weighted Gini decrease. Regression trees (used
inside gradient boosting) split on squared-error reduction of their target
but still record the class-label Gini of every node, so impurity-based
importances are computed the same way for every tree model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._base import BinaryClassifier, check_binary_xy


@dataclass
class Tree:
    """Flat array representation of a fitted binary tree.

    ``feature[i] == -1`` marks node ``i`` as a leaf. Rows with
    ``x[feature] <= threshold`` go to ``left``. ``value`` holds the leaf
    output (class-1 probability or regression value); ``impurity`` the
    class-label Gini of the node's training rows.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_node: np.ndarray
    impurity: np.ndarray

    @classmethod
    def from_nodes(cls, nodes):
        cols = list(zip(*nodes))
        return cls(
            feature=np.asarray(cols[0], dtype=np.int64),
            threshold=np.asarray(cols[1], dtype=float),
            left=np.asarray(cols[2], dtype=np.int64),
            right=np.asarray(cols[3], dtype=np.int64),
            value=np.asarray(cols[4], dtype=float),
            n_node=np.asarray(cols[5], dtype=np.int64),
            impurity=np.asarray(cols[6], dtype=float),
        )

    @property
    def node_count(self):
        return self.feature.size

    @property
    def n_splits(self):
        return int(np.count_nonzero(self.feature >= 0))

    def depth(self):
        depth = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X):
        """Leaf index reached by each row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                return node
            go_left = X[rows, np.where(active, feat, 0)] <= self.threshold[node]
            node = np.where(active,
                            np.where(go_left, self.left[node], self.right[node]),
                            node)

    def predict(self, X):
        return self.value[self.apply(X)]


def gini(n_pos, n):
    p = n_pos / n
    return 2.0 * p * (1.0 - p)


def _best_split(Xn, target, criterion):
    """Best (column, threshold, gain) over the columns of ``Xn``.

    Ties resolve to the lowest column, then the lowest threshold. A
    zero-gain split is still returned, so impure nodes such as an XOR
    root are not left unsplit; None means no column has two distinct values.
    """
    n, m = Xn.shape
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = Xn[order, np.arange(m)]
    ts = target[order]
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    csum = np.cumsum(ts, axis=0)[:-1]
    total = target.sum()

    if criterion == "gini":
        pos_l, pos_r = csum, total - csum
        g_l = 2.0 * pos_l * (n_left - pos_l) / (n_left * n_left)
        g_r = 2.0 * pos_r * (n_right - pos_r) / (n_right * n_right)
        gain = gini(total, n) - (n_left * g_l + n_right * g_r) / n
    else:
        gain = (csum ** 2 / n_left + (total - csum) ** 2 / n_right
                - total ** 2 / n) / n

    valid = xs[:-1] < xs[1:]
    gain = np.where(valid, gain, -np.inf)
    pos = np.argmax(gain, axis=0)
    best_per_col = gain[pos, np.arange(m)]
    col = int(np.argmax(best_per_col))
    best = best_per_col[col]
    if not np.isfinite(best):
        return None
    i = pos[col]
    lo, hi = xs[i, col], xs[i + 1, col]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return col, float(thr), float(best)


def build_tree(X, y, target=None, *, criterion="gini", max_depth=8,
               min_samples_split=5, max_features=None, rng=None):
    """Grow a tree depth-first and return it as a :class:`Tree`.

    ``target`` defaults to ``y``; regression trees pass the boosting gradient
    here and keep ``y`` for the recorded Gini. ``max_features`` columns are
    drawn per split from ``rng`` when given.
    """
    n_total, p = X.shape
    if target is None:
        target = y
    nodes = []
    # (rows, depth, parent index, is_left)
    stack = [(np.arange(n_total), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        idx = len(nodes)
        if parent >= 0:
            nodes[parent][2 if is_left else 3] = idx
        y_node = y[rows]
        t_node = y_node if target is y else target[rows]
        n = rows.size
        n_pos = float(y_node.sum())
        value = float(t_node.sum()) / n
        nodes.append([-1, 0.0, -1, -1, value, n, gini(n_pos, n)])

        if depth >= max_depth or n < min_samples_split:
            continue
        if criterion == "gini" and (n_pos == 0 or n_pos == n):
            continue
        if criterion == "mse" and np.ptp(t_node) == 0:
            continue
        if max_features is not None and max_features < p:
            cols = np.sort(rng.choice(p, size=max_features, replace=False))
        else:
            cols = np.arange(p)
        Xn = X[rows] if cols.size == p else X[rows][:, cols]
        split = _best_split(Xn, t_node, criterion)
        if split is None:
            continue
        col, thr, _ = split
        feat = int(cols[col])
        nodes[idx][0] = feat
        nodes[idx][1] = thr
        go_left = X[rows, feat] <= thr
        # right pushed first so the left subtree gets the lower node indices
        stack.append((rows[~go_left], depth + 1, idx, False))
        stack.append((rows[go_left], depth + 1, idx, True))
    return Tree.from_nodes(nodes)


class DecisionTree(BinaryClassifier):
    """Gini CART classifier; leaves predict the class-1 fraction of their rows.

    Parameters
    ----------
    max_depth : int, default=8
    min_samples_split : int, default=5
        Nodes with fewer rows become leaves.
    max_features : int or None, default=None
        Columns examined per split; ``None`` examines all of them.
    random_state : int or None
        Seed for the per-split column draw.
    """

    def __init__(self, max_depth=8, min_samples_split=5, max_features=None,
                 random_state=None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_binary_xy(X, y)
        self.n_features_in_ = X.shape[1]
        self.tree_ = build_tree(
            X, y, criterion="gini", max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            max_features=self.max_features,
            rng=np.random.default_rng(self.random_state))
        return self

    def _positive_proba(self, X):
        return self.tree_.predict(X)

    @classmethod
    def from_tree(cls, tree, n_features):
        """Wrap a hand-built :class:`Tree` as a fitted estimator."""
        est = cls()
        est.tree_ = tree
        est.n_features_in_ = n_features
        return est
