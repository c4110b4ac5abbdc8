"""Dataset ingestion, splitting, standardization and bootstrap resampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import (
    CannotStratify,
    DatasetLoad,
    EmptyDataset,
    MissingColumn,
    ParseError,
    SingleClassDataset,
    WidthMismatch,
)

MAX_CLASS_RETRIES = 50

# Guards against float products such as 0.7 * 30 == 20.999999999999996.
_ROUND_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with binary labels.

    Parameters
    ----------
    X : ndarray of shape (n_samples, n_features)
        Finite real features.
    y : ndarray of shape (n_samples,)
        Labels in {0, 1}; both classes must be present.
    feature_names : tuple of str
        Distinct column names, one per feature.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        if X.shape[0] == 0:
            raise EmptyDataset("dataset has no rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains NaN or infinite values")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        y = y.astype(np.int64)
        if np.unique(y).size < 2:
            raise SingleClassDataset("labels contain a single class")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length must match column count")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def take(self, rows):
        """Rows ``rows`` (duplicates allowed) as a new Dataset."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.X[rows], self.y[rows], self.feature_names)


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_rows: np.ndarray
    test_rows: np.ndarray


def load_csv(path, label_column):
    """Read a header-first, comma-separated file into a :class:`Dataset`.

    Every non-label cell must parse as a finite real; label cells must be
    0 or 1. Rows are numbered from 1 for the first data row.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetLoad(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        if label_column not in header:
            raise MissingColumn(f"label column {label_column!r} not in header")
        label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]

        features, labels = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(row_no, None,
                                 f"expected {len(header)} cells, got {len(row)}")
            values = []
            for col, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(row_no, col, f"not a number: {cell!r}") from None
                if not math.isfinite(v):
                    raise ParseError(row_no, col, f"non-finite value: {cell!r}")
                values.append(v)
            label = values.pop(label_idx)
            if label not in (0.0, 1.0):
                raise ParseError(row_no, label_column,
                                 f"label must be 0 or 1, got {row[label_idx]!r}")
            labels.append(int(label))
            features.append(values)

    if not labels:
        raise EmptyDataset(f"{path} has no data rows")
    if len(set(labels)) < 2:
        raise SingleClassDataset(f"{path}: all labels are {labels[0]}")
    X = np.asarray(features, dtype=float).reshape(len(labels), len(names))
    return Dataset(X, np.asarray(labels), tuple(names))


def _two_class(y):
    return y.size > 0 and 0 < int(y.sum()) < y.size


def train_test_split(d, train_fraction=0.7, seed=0):
    """Uniformly random train/test partition with ``floor(fraction * M)`` train rows.

    The permutation is redrawn (up to ``MAX_CLASS_RETRIES`` times) until both
    sides contain both classes.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    m = d.n_samples
    if m < 10:
        raise ValueError("need at least 10 rows to split")
    n_train = int(math.floor(train_fraction * m + _ROUND_EPS))
    rng = np.random.default_rng(seed)
    for _ in range(MAX_CLASS_RETRIES):
        perm = rng.permutation(m)
        train_rows, test_rows = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        if _two_class(d.y[train_rows]) and _two_class(d.y[test_rows]):
            return SplitPair(d.take(train_rows), d.take(test_rows), seed,
                             train_rows, test_rows)
    raise CannotStratify(
        f"no two-class split found in {MAX_CLASS_RETRIES} attempts")


def bootstrap_size(n_rows, proportion):
    return int(math.ceil(proportion * n_rows - _ROUND_EPS))


def subsample_bootstrap(train, proportion, seed):
    """Draw ``ceil(proportion * |train|)`` rows with replacement.

    Subsampling and bootstrapping are merged into this single draw. Draws
    that come out single-class are repeated up to ``MAX_CLASS_RETRIES`` times.
    """
    if not 0 < proportion <= 1:
        raise ValueError("proportion must lie in (0, 1]")
    size = max(bootstrap_size(train.n_samples, proportion), 1)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_CLASS_RETRIES):
        rows = rng.integers(0, train.n_samples, size=size)
        if _two_class(train.y[rows]):
            return train.take(rows)
    raise CannotStratify(
        f"bootstrap of {size} rows stayed single-class after "
        f"{MAX_CLASS_RETRIES} attempts")


class Standardizer(TransformerMixin, BaseEstimator):
    """Zero-mean, unit-variance scaling; constant columns keep scale 1."""

    def fit(self, X, y=None):
        X = check_array(X)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise WidthMismatch(
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_


def fit_standardizer(d):
    return Standardizer().fit(d.X)


def apply_standardizer(s, d):
    return Dataset(s.transform(d.X), d.y, d.feature_names)
