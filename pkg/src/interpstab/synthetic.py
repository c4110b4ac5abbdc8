"""Planted-signal datasets with a known feature ordering."""

import csv
from pathlib import Path

import numpy as np

from .data import Dataset


def make_planted(n_rows=1000, n_features=10, weights=(2.0, -1.5), seed=0):
    """Gaussian features; labels drawn from ``sigmoid(sum_j weights[j] * x_j)``.

    Only the first ``len(weights)`` features carry signal, in decreasing
    order of ``|weight|``; the rest are noise.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_rows, n_features))
    logit = X[:, :len(weights)] @ np.asarray(weights, dtype=float)
    y = (rng.random(n_rows) < 1.0 / (1.0 + np.exp(-logit))).astype(int)
    names = tuple(f"x{j}" for j in range(n_features))
    return Dataset(X, y, names)


def write_dataset(d, path, label="y"):
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(d.feature_names) + [label])
        for row, target in zip(d.X, d.y):
            writer.writerow([repr(float(v)) for v in row] + [int(target)])
