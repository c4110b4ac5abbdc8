"""Rank-stability and trueness metrics, F1 and accuracy buckets.

Rankings are sequences of hashable feature identifiers, most important
first. The weighted truncated Kendall-Tau distance compares two rankings
over the union of their top-``k`` elements: elements outside a ranking's
top ``k`` share position ``k + 1`` in it, a pair that is strictly reversed
counts 1 and a pair tied in exactly one ranking counts 1/2. Each pair is
weighted by the reciprocal of the best position either element reaches in
either ranking, and the total is divided by the weight all pairs would
carry if every one of them were discordant.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    LengthMismatch,
    MismatchedElements,
    RankTooShort,
    TooFewRankings,
    TooFewValues,
)

DEFAULT_K = 10
TOP_TUPLE = 3

BUCKET_LABELS = ("low", "medium", "high")
BUCKET_EDGES = (0.5, 0.65, 0.8, 1.0)


@dataclass(frozen=True)
class StabilityScore:
    value: float
    n_rankings: int
    k: int | None
    n_pairs: int


@dataclass(frozen=True)
class TruenessScore:
    value: float
    mode: tuple
    n_rankings: int


@dataclass(frozen=True)
class PerturbationInterval:
    center: float
    lower: float
    upper: float
    percentiles: tuple = (10.0, 90.0)


def kendall_tau(r1, r2):
    """Fraction of element pairs ordered differently by two permutations."""
    r1, r2 = list(r1), list(r2)
    if len(r1) != len(r2) or set(r1) != set(r2) or len(set(r1)) != len(r1):
        raise MismatchedElements("rankings must be permutations of the same elements")
    n = len(r1)
    if n < 2:
        return 0.0
    pos2 = {e: i for i, e in enumerate(r2)}
    seq = [pos2[e] for e in r1]
    discordant = sum(1 for i in range(n) for j in range(i + 1, n) if seq[i] > seq[j])
    return discordant / (n * (n - 1) // 2)


def _positions(rankings, k):
    """Position matrix (n_rankings, n_elements) with absent elements at k + 1."""
    elements = sorted({e for r in rankings for e in r[:k]}, key=repr)
    index = {e: i for i, e in enumerate(elements)}
    pos = np.full((len(rankings), len(elements)), k + 1, dtype=float)
    for row, r in enumerate(rankings):
        for rank, e in enumerate(r[:k], start=1):
            pos[row, index[e]] = rank
    return pos


def _pairwise_distances(pos_a, pos_b, k, weighting):
    """Weighted distance between row ``pos_a`` and every row of ``pos_b``."""
    n_el = pos_a.size
    ia, ib = np.triu_indices(n_el, 1)
    a1, b1 = pos_a[ia], pos_a[ib]
    a2, b2 = pos_b[:, ia], pos_b[:, ib]
    in_union = ((pos_a <= k) | (pos_b <= k))
    include = in_union[:, ia] & in_union[:, ib]
    s1 = np.sign(a1 - b1)
    s2 = np.sign(a2 - b2)
    disc = np.where(s1 * s2 < 0, 1.0, 0.0)
    disc = np.where((s1 == 0) != (s2 == 0), 0.5, disc)
    if weighting == "uniform":
        w = include.astype(float)
    else:
        best = np.minimum(np.minimum(a1, b1), np.minimum(a2, b2))
        w = np.where(include, 1.0 / best, 0.0)
    ceiling = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = (w * disc).sum(axis=1) / ceiling
    return np.where(ceiling > 0, d, 0.0)


def wkt_distance(r1, r2, k=DEFAULT_K, weighting="rank"):
    """Weighted truncated Kendall-Tau distance in [0, 1].

    Parameters
    ----------
    k : int or None, default=10
        Truncation depth; ``None`` keeps the full rankings.
    weighting : {"rank", "uniform"}
        ``"uniform"`` gives every pair weight 1. With ``k=None`` and two
        permutations of the same elements it reproduces :func:`kendall_tau`.
    """
    r1, r2 = list(r1), list(r2)
    if len(set(r1)) != len(r1) or len(set(r2)) != len(r2):
        raise ValueError("rankings must not repeat elements")
    if k is None:
        k = max(len(r1), len(r2))
    if k < 1:
        raise ValueError("k must be at least 1")
    if weighting == "uniform":
        return _uniform_distance(r1[:k], r2[:k], k)
    pos = _positions([r1, r2], k)
    return float(_pairwise_distances(pos[0], pos[1:], k, weighting)[0])


def _uniform_distance(r1, r2, k):
    # integer counts keep the uniform case bit-identical to kendall_tau
    p1 = {e: i for i, e in enumerate(r1)}
    p2 = {e: i for i, e in enumerate(r2)}
    union = list(dict.fromkeys(r1 + r2))
    half_units = 0
    n = len(union)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = union[i], union[j]
            s1 = _cmp(p1.get(a, k), p1.get(b, k))
            s2 = _cmp(p2.get(a, k), p2.get(b, k))
            if s1 * s2 < 0:
                half_units += 2
            elif (s1 == 0) != (s2 == 0):
                half_units += 1
    pairs = n * (n - 1) // 2
    if pairs == 0:
        return 0.0
    if half_units % 2 == 0:
        return (half_units // 2) / pairs
    return half_units / (2 * pairs)


def _cmp(a, b):
    return (a > b) - (a < b)


def distance_matrix(rankings, k=DEFAULT_K, weighting="rank"):
    """Symmetric matrix of pairwise :func:`wkt_distance` values."""
    rankings = [list(r) for r in rankings]
    n = len(rankings)
    if k is None:
        k = max(len(r) for r in rankings)
    pos = _positions(rankings, k)
    D = np.zeros((n, n))
    for i in range(n - 1):
        D[i, i + 1:] = _pairwise_distances(pos[i], pos[i + 1:], k, weighting)
    return D + D.T


def stability(rankings, k=DEFAULT_K):
    """One minus the mean pairwise weighted distance over all ranking pairs."""
    rankings = list(rankings)
    n = len(rankings)
    if n < 2:
        raise TooFewRankings(f"stability needs at least 2 rankings, got {n}")
    D = distance_matrix(rankings, k)
    n_pairs = n * (n - 1) // 2
    mean = D[np.triu_indices(n, 1)].mean()
    return StabilityScore(float(1.0 - mean), n, k, n_pairs)


def stability_contributions(rankings, k=DEFAULT_K):
    """Per-ranking stability: one minus its mean distance to all the others.

    The mean of the contributions equals :func:`stability`.
    """
    rankings = list(rankings)
    n = len(rankings)
    if n < 2:
        raise TooFewRankings(f"stability needs at least 2 rankings, got {n}")
    D = distance_matrix(rankings, k)
    return 1.0 - D.sum(axis=1) / (n - 1)


def p_mode(rankings, top=TOP_TUPLE):
    """Frequency of the most common ordered top-``top`` tuple.

    Equally frequent tuples resolve to the smallest one.
    """
    rankings = list(rankings)
    if not rankings:
        raise TooFewRankings("p_mode needs at least one ranking")
    if any(len(r) < top for r in rankings):
        raise RankTooShort(f"every ranking needs at least {top} entries")
    counts = Counter(tuple(r[:top]) for r in rankings)
    best = max(counts.values())
    mode = min(t for t, c in counts.items() if c == best)
    return TruenessScore(best / len(rankings), mode, len(rankings))


def f1_score(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise LengthMismatch("predicted and actual differ in length")
    tp = int(np.sum((predicted == 1) & (actual == 1)))
    fp = int(np.sum((predicted == 1) & (actual == 0)))
    fn = int(np.sum((predicted == 0) & (actual == 1)))
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def bucketize(f1, edges=BUCKET_EDGES, labels=BUCKET_LABELS):
    """Accuracy bucket of an F1 score, or None below the first edge.

    Interior edges belong to the bucket above them; the last edge closes the
    top bucket.
    """
    if len(edges) != len(labels) + 1:
        raise ValueError("need one more edge than labels")
    if f1 is None or (isinstance(f1, float) and math.isnan(f1)):
        return None
    for label, lo, hi in zip(labels, edges[:-1], edges[1:]):
        if lo <= f1 < hi:
            return label
    if f1 == edges[-1]:
        return labels[-1]
    return None


def perturbation_interval(values, percentiles=(10.0, 90.0)):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise TooFewValues("perturbation interval needs at least 2 values")
    lo, hi = np.percentile(values, percentiles, method="linear")
    return PerturbationInterval(float(values.mean()), float(lo), float(hi),
                                tuple(float(q) for q in percentiles))
