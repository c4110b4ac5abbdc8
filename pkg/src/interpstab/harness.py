"""Subsample-and-bootstrap experiment runner and its aggregations.

For every training proportion ``p`` the runner draws ``N`` bootstrap
replicates of size ``ceil(p * |train|)``, fits each model once per replicate,
runs every configured explainer on it and records the test-set F1 together
with the resulting feature rankings. Aggregation turns those records into
per-proportion curves, accuracy-bucket summaries and stability histograms.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import explain
from .config import METHOD_ORDER, METHODS
from .data import load_csv, subsample_bootstrap, train_test_split
from .exceptions import ConfigInvalid, InterpStabError, TooFewRankings
from .models import make_model
from .rankmetrics import (
    BUCKET_LABELS,
    bucketize,
    distance_matrix,
    f1_score,
    p_mode,
    perturbation_interval,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def derive_seed(*parts):
    """64-bit seed from a SHA-256 of ``parts``; independent of execution order."""
    blob = json.dumps(parts, separators=(",", ":")).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one (proportion, replicate, method) trial.

    Rankings hold feature names, most important first. ``local_ranks`` has
    one ranking per probe instance. ``wall_time`` is informational and is
    not part of the persisted records.
    """

    dataset: str
    method: str
    proportion: float
    p_index: int
    replicate: int
    seed: int
    f1: float | None
    global_rank: tuple | None
    local_ranks: tuple | None
    error: str | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def ok(self):
        return self.error is None

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": self.dataset,
            "method": self.method,
            "proportion": self.proportion,
            "p_index": self.p_index,
            "replicate": self.replicate,
            "seed": self.seed,
            "f1": self.f1,
            "global_rank": None if self.global_rank is None else list(self.global_rank),
            "local_ranks": (None if self.local_ranks is None
                            else [list(r) for r in self.local_ranks]),
            "error": self.error,
        }


# -- running ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Context:
    config: object
    train: object
    test: object
    probes: np.ndarray
    global_instances: np.ndarray


def prepare(config):
    """Load and split the dataset, and fix the probe instances."""
    data = load_csv(config.dataset_path, config.label_column)
    split = train_test_split(data, config.train_fraction,
                             derive_seed(config.seed, config.dataset_id, "split"))
    n_test = split.test.n_samples
    if config.n_probes > n_test:
        raise ConfigInvalid(f"probes={config.n_probes} exceeds test size {n_test}")
    n_global = min(config.explainers["shap_global_instances"], n_test)
    return _Context(config, split.train, split.test,
                    split.test.X[:config.n_probes], split.test.X[:n_global])


def _explain(spec, model, sample, ctx, seed):
    """(global ranking, local rankings) as index tuples for one fitted model."""
    cfg = ctx.config.explainers
    rng = np.random.default_rng(seed)
    global_rank = local_ranks = None

    if spec.explainer == "rcm":
        global_rank = explain.rcm_global(model).ranks()
        Z = model.standardizer_.transform(ctx.probes)
        local_ranks = [explain.rcm_local(model, z, k).ranks() for k, z in enumerate(Z)]
    elif spec.explainer == "mdi":
        global_rank = explain.mdi_global(model).ranks()
    elif spec.explainer == "self":
        global_rank = explain.additive_explain(model).ranks()
        local_ranks = [explain.additive_explain(model, x, k).ranks()
                       for k, x in enumerate(ctx.probes)]
    elif spec.explainer == "shap":
        n_bg = min(cfg["shap_background"], sample.n_samples)
        background = sample.X[np.sort(rng.choice(sample.n_samples, n_bg, replace=False))]
        exact = sample.n_features <= cfg["shap_exact_max_features"]

        def shap_one(x, k):
            if exact:
                return explain.shap_exact(model, x, background, k,
                                          max_features=cfg["shap_exact_max_features"])
            return explain.shap_sampled(model, x, background,
                                        cfg["shap_permutations"],
                                        seed=rng.integers(2**63), instance=k)

        phis = [np.abs(shap_one(x, k).values) for k, x in enumerate(ctx.global_instances)]
        global_rank = explain.rank_features(np.mean(phis, axis=0))
        local_ranks = [explain.ImportanceVector(np.abs(shap_one(x, k).values),
                                                "local", k).ranks()
                       for k, x in enumerate(ctx.probes)]
    elif spec.explainer == "lime":
        local_ranks = [
            explain.lime_local(model, x, sample.X, cfg["lime_samples"],
                               cfg["lime_kernel_width"], cfg["lime_ridge"],
                               seed=rng.integers(2**63), instance=k).importance().ranks()
            for k, x in enumerate(ctx.probes)]
    else:
        raise ValueError(f"unknown explainer {spec.explainer!r}")
    return global_rank, local_ranks


class _TrialFailed(Exception):
    pass


def _run_replicate(ctx, p_index, replicate):
    cfg = ctx.config
    names = ctx.train.feature_names
    proportion = cfg.proportions[p_index]
    specs = cfg.method_specs
    base = (cfg.seed, cfg.dataset_id, p_index, replicate)

    def record(spec, f1=None, g=None, loc=None, error=None, elapsed=0.0):
        return TrialRecord(
            cfg.dataset_id, spec.method_id, proportion, p_index, replicate,
            derive_seed(*base, spec.method_id), f1,
            None if g is None else tuple(names[i] for i in g),
            None if loc is None else tuple(tuple(names[i] for i in r) for r in loc),
            error, elapsed)

    try:
        sample = subsample_bootstrap(ctx.train, proportion, derive_seed(*base, "bootstrap"))
    except InterpStabError as exc:
        return [record(s, error=f"{type(exc).__name__}: {exc}") for s in specs]

    fitted = {}
    out = []
    for spec in specs:
        start = time.perf_counter()
        try:
            if spec.model not in fitted:
                try:
                    model = make_model(spec.model, cfg.models.get(spec.model),
                                       seed=derive_seed(*base, spec.model))
                    model.fit(sample.X, sample.y)
                    f1 = f1_score(model.predict(ctx.test.X), ctx.test.y)
                    fitted[spec.model] = (model, f1, None)
                except (InterpStabError, ArithmeticError, np.linalg.LinAlgError) as exc:
                    fitted[spec.model] = (None, None, f"{type(exc).__name__}: {exc}")
            model, f1, fit_error = fitted[spec.model]
            if fit_error:
                raise _TrialFailed(fit_error)
            g, loc = _explain(spec, model, sample, ctx,
                              derive_seed(*base, spec.method_id))
            out.append(record(spec, f1, g, loc, elapsed=time.perf_counter() - start))
        except _TrialFailed as exc:
            out.append(record(spec, error=str(exc)))
        except (InterpStabError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out.append(record(spec, error=f"{type(exc).__name__}: {exc}"))
    return out


_WORKER_CTX = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker(task):
    return _run_replicate(_WORKER_CTX, *task)


def run_experiment(config, jobs=1, context=None):
    """Run every (proportion, replicate, method) trial and return the records.

    Records come back ordered by proportion, replicate, then configured
    method order, whatever ``jobs`` is. Failed trials are kept with their
    ``error`` set.
    """
    ctx = context if context is not None else prepare(config)
    tasks = [(pi, r) for pi in range(len(config.proportions))
             for r in range(config.n_replicates)]
    if jobs is None or jobs <= 1:
        chunks = [_run_replicate(ctx, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(ctx,)) as pool:
            chunks = list(pool.map(_worker, tasks,
                                   chunksize=max(1, len(tasks) // (4 * jobs))))
    records = [rec for chunk in chunks for rec in chunk]
    n_err = sum(not r.ok for r in records)
    if n_err:
        log.warning("%d of %d trials failed", n_err, len(records))
    return records


# -- aggregation -----------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    dataset: str
    method: str
    scope: str
    proportion: float
    n_replicates: int
    n_errors: int
    mean_f1: float
    f1_lower: float
    f1_upper: float
    stability: float
    stability_lower: float
    stability_upper: float
    pmode: float


@dataclass(frozen=True)
class BucketSummary:
    method: str
    bucket: str
    scope: str
    n_cells: int
    mean_stability: float
    stability_lower: float
    stability_upper: float
    mean_pmode: float
    pmode_lower: float
    pmode_upper: float


@dataclass(frozen=True)
class HistogramRow:
    method: str
    bucket: str
    scope: str
    bin_index: int
    bin_lower: float
    bin_upper: float
    count: int
    mass: float


def _method_key(method):
    return METHOD_ORDER.index(method) if method in METHODS else len(METHOD_ORDER)


def _ranking_summary(rankings, k):
    """(stability, per-replicate contributions, pMode) for one ranking set."""
    n = len(rankings)
    D = distance_matrix(rankings, k)
    stab = float(1.0 - D[np.triu_indices(n, 1)].mean())
    contrib = 1.0 - D.sum(axis=1) / (n - 1)
    return stab, contrib, p_mode(rankings).value


def aggregate_curves(records, k=10, percentiles=(10.0, 90.0)):
    """Per (dataset, method, scope, proportion) stability, pMode and F1.

    Local-scope values are averaged over probe instances. Intervals are
    percentile bands over replicates: for stability, each replicate's mean
    agreement with the other replicates. Cells with fewer than two valid
    replicates are skipped with a warning.
    """
    cells = defaultdict(list)
    for rec in records:
        cells[(rec.dataset, rec.method, rec.p_index)].append(rec)

    rows, skipped = [], []
    for key in sorted(cells, key=lambda c: (c[0], _method_key(c[1]), c[1], c[2])):
        recs = cells[key]
        valid = sorted((r for r in recs if r.ok), key=lambda r: r.replicate)
        n_err = len(recs) - len(valid)
        f1s = [r.f1 for r in valid]
        scopes = []
        if any(r.global_rank is not None for r in valid):
            scopes.append("global")
        if any(r.local_ranks is not None for r in valid):
            scopes.append("local")
        if len(valid) < 2:
            skipped.append(key)
            continue
        f1_band = perturbation_interval(f1s, percentiles)
        for scope in scopes:
            if scope == "global":
                stab, contrib, pm = _ranking_summary([r.global_rank for r in valid], k)
            else:
                n_probes = len(valid[0].local_ranks)
                per_probe = [_ranking_summary([r.local_ranks[j] for r in valid], k)
                             for j in range(n_probes)]
                stab = float(np.mean([s for s, _, _ in per_probe]))
                contrib = np.mean([c for _, c, _ in per_probe], axis=0)
                pm = float(np.mean([m for _, _, m in per_probe]))
            band = perturbation_interval(contrib, percentiles)
            rows.append(CurveRow(
                key[0], key[1], scope, recs[0].proportion, len(valid), n_err,
                f1_band.center, f1_band.lower, f1_band.upper,
                stab, band.lower, band.upper, pm))
    if skipped:
        log.warning("skipped %d cells with fewer than 2 valid replicates: %s",
                    len(skipped), ", ".join(f"{m} p_index={p}" for _, m, p in skipped))
    if not rows:
        raise TooFewRankings("no cell has 2 valid replicates")
    return rows


def _band(values, percentiles):
    if not values:
        return math.nan, math.nan, math.nan
    if len(values) == 1:
        return values[0], values[0], values[0]
    b = perturbation_interval(values, percentiles)
    return b.center, b.lower, b.upper


def _bucketed(curves, edges):
    groups = defaultdict(list)
    for row in curves:
        bucket = bucketize(row.mean_f1, edges, BUCKET_LABELS)
        if bucket is not None:
            groups[(row.method, bucket, row.scope)].append(row)
    return groups


def _methods_and_scopes(curves):
    seen = {}
    for row in curves:
        seen.setdefault(row.method, [])
        if row.scope not in seen[row.method]:
            seen[row.method].append(row.scope)
    order = sorted(seen, key=lambda m: (_method_key(m), m))
    return [(m, s) for m in order for s in ("global", "local") if s in seen[m]]


def aggregate_buckets(records=None, curves=None, edges=(0.5, 0.65, 0.8, 1.0),
                      k=10, percentiles=(10.0, 90.0)):
    """Mean stability and pMode per (method, accuracy bucket, scope).

    Each curve cell is bucketed by its mean F1; cells below the lowest edge
    are dropped. Buckets without cells are reported with ``n_cells == 0``.
    """
    if curves is None:
        curves = aggregate_curves(records, k, percentiles)
    groups = _bucketed(curves, edges)
    out = []
    for method, scope in _methods_and_scopes(curves):
        for bucket in BUCKET_LABELS:
            cells = groups.get((method, bucket, scope), [])
            s = _band([c.stability for c in cells], percentiles)
            m = _band([c.pmode for c in cells], percentiles)
            out.append(BucketSummary(method, bucket, scope, len(cells), *s, *m))
    return out


def histogram_data(records=None, bins=20, curves=None, edges=(0.5, 0.65, 0.8, 1.0),
                   k=10, percentiles=(10.0, 90.0), scopes=("global",)):
    """Normalised stability histograms over [0, 1] per (method, bucket).

    Only (method, bucket) pairs with at least one cell are emitted.
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if curves is None:
        curves = aggregate_curves(records, k, percentiles)
    groups = _bucketed(curves, edges)
    bin_edges = np.linspace(0.0, 1.0, bins + 1)
    out = []
    for method, scope in _methods_and_scopes(curves):
        if scope not in scopes:
            continue
        for bucket in BUCKET_LABELS:
            cells = groups.get((method, bucket, scope), [])
            if not cells:
                continue
            values = np.clip([c.stability for c in cells], 0.0, 1.0)
            counts, _ = np.histogram(values, bins=bin_edges)
            for i, c in enumerate(counts):
                out.append(HistogramRow(method, bucket, scope, i,
                                        float(bin_edges[i]), float(bin_edges[i + 1]),
                                        int(c), c / len(cells)))
    return out
