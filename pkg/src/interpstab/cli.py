"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 dataset error,
4 unusable records, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
from datetime import datetime
from pathlib import Path

import numpy as np
import sklearn

from . import __version__
from .config import load_config
from .data import load_csv
from .exceptions import (
    ConfigInvalid,
    DatasetError,
    MissingColumn,
    RecordsError,
    TooFewRankings,
)
from .harness import (
    BucketSummary,
    CurveRow,
    HistogramRow,
    aggregate_buckets,
    aggregate_curves,
    derive_seed,
    histogram_data,
    run_experiment,
)
from .records import read_records, write_csv, write_json, write_records

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_DATA, EXIT_RECORDS = 0, 1, 2, 3, 4

OUTPUT_ROOT_ENV = "INTERPSTAB_OUTPUT_ROOT"

log = logging.getLogger("interpstab")


def _proportion_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty proportion list")
    return values


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="interpstab",
        description="Accuracy-versus-interpretation-stability experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a CSV dataset")
    p.add_argument("dataset", help="CSV file with a header row")
    p.add_argument("--label", required=True, help="label column name")

    p = sub.add_parser("run", help="run an experiment from a config or manifest")
    p.add_argument("--config", required=True, help="TOML config or run manifest JSON")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--n", type=_positive_int, help="bootstrap replicates per proportion")
    p.add_argument("--proportions", type=_proportion_list,
                   help="comma-separated training proportions, e.g. 0.1,0.5,1.0")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    p.add_argument("--out", help="output directory (must not hold a previous run)")

    for name, text in (("metrics", "recompute aggregate CSVs from records"),
                       ("report", "print aggregate tables from records")):
        p = sub.add_parser(name, help=text)
        p.add_argument("records", help="records.jsonl from a run")
        p.add_argument("--manifest",
                       help="run manifest with aggregation settings "
                            "(default: manifest.json next to the records)")
        p.add_argument("--out", help="directory for the CSV files")
    return parser


def _new_run_dir(prefix):
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    path = root / f"{prefix}-{stamp}"
    suffix = 1
    while path.exists():
        path = root / f"{prefix}-{stamp}-{suffix}"
        suffix += 1
    return path


def _prepare_out(path):
    path = Path(path)
    if path.exists() and any(path.iterdir()):
        raise ConfigInvalid(f"output directory {path} is not empty")
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_validate(args):
    d = load_csv(args.dataset, args.label)
    n_pos = int(d.y.sum())
    print(f"dataset:   {args.dataset}")
    print(f"instances: {d.n_samples}")
    print(f"features:  {d.n_features}")
    print(f"classes:   0={d.n_samples - n_pos} 1={n_pos} "
          f"(positive rate {n_pos / d.n_samples:.3f})")
    constant = [n for n, col in zip(d.feature_names, d.X.T) if np.ptp(col) == 0]
    for name in constant:
        print(f"warning: column {name!r} is constant")
    if d.n_samples < 10:
        print("warning: fewer than 10 rows; the train/test split needs at least 10")
    return EXIT_OK


def _aggregate(records, settings):
    curves = aggregate_curves(records, settings["k"], settings["percentiles"])
    buckets = aggregate_buckets(curves=curves, edges=settings["bucket_edges"],
                                percentiles=settings["percentiles"])
    hist = histogram_data(curves=curves, bins=settings["histogram_bins"],
                          edges=settings["bucket_edges"])
    return curves, buckets, hist


def _write_aggregates(out, curves, buckets, hist):
    write_csv(out / "curves.csv", curves, CurveRow)
    write_csv(out / "buckets.csv", buckets, BucketSummary)
    write_csv(out / "histograms.csv", hist, HistogramRow)


def _settings(cfg):
    return {"k": cfg.k, "percentiles": cfg.percentiles,
            "bucket_edges": cfg.bucket_edges, "histogram_bins": cfg.histogram_bins}


def cmd_run(args):
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.n is not None:
        changes["n_replicates"] = args.n
    if args.proportions is not None:
        changes["proportions"] = tuple(args.proportions)
    if changes:
        try:
            cfg = cfg.replace(**changes)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc
    out_path = args.out or cfg.output_dir
    out = _prepare_out(out_path if out_path else _new_run_dir("run"))

    records = run_experiment(cfg, jobs=args.jobs)
    write_records(out / "records.jsonl", records)
    with (out / "timings.jsonl").open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"method": r.method, "p_index": r.p_index,
                                 "replicate": r.replicate,
                                 "wall_time": r.wall_time}) + "\n")

    n_err = sum(not r.ok for r in records)
    manifest_cfg = cfg.replace(output_dir=None).to_dict()
    write_json(out / "manifest.json", {
        "schema_version": 1,
        "config": manifest_cfg,
        "seeds": {
            "master": cfg.seed,
            "split": derive_seed(cfg.seed, cfg.dataset_id, "split"),
            "bootstrap": [[derive_seed(cfg.seed, cfg.dataset_id, pi, r, "bootstrap")
                           for r in range(cfg.n_replicates)]
                          for pi in range(len(cfg.proportions))],
        },
        "versions": {
            "interpstab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "counts": {"records": len(records), "errors": n_err},
        "created": datetime.now().isoformat(timespec="seconds"),
    })
    try:
        _write_aggregates(out, *_aggregate(records, _settings(cfg)))
    except TooFewRankings as exc:
        print(f"warning: aggregates not written: {exc}", file=sys.stderr)
    print(f"wrote {len(records)} records to {out}")
    if n_err:
        print(f"warning: {n_err} of {len(records)} trials failed "
              f"(see 'error' in records.jsonl)", file=sys.stderr)
    return EXIT_OK


def _load_settings(args):
    manifest = Path(args.manifest) if args.manifest else Path(args.records).parent / "manifest.json"
    if manifest.exists():
        return _settings(load_config(manifest))
    if args.manifest:
        raise ConfigInvalid(f"manifest {manifest} not found")
    return {"k": 10, "percentiles": (10.0, 90.0),
            "bucket_edges": (0.5, 0.65, 0.8, 1.0), "histogram_bins": 20}


def cmd_metrics(args):
    settings = _load_settings(args)
    records = read_records(args.records)
    aggregates = _aggregate(records, settings)
    out = _prepare_out(args.out if args.out else _new_run_dir("metrics"))
    _write_aggregates(out, *aggregates)
    print(f"wrote curves.csv, buckets.csv, histograms.csv to {out}")
    return EXIT_OK


def _fmt(v):
    return "-" if v != v else f"{v:.3f}"


def cmd_report(args):
    settings = _load_settings(args)
    records = read_records(args.records)
    curves, buckets, hist = _aggregate(records, settings)
    if args.out:
        _write_aggregates(_prepare_out(args.out), curves, buckets, hist)

    print("Stability and pMode by proportion")
    print(f"{'method':<15}{'scope':<8}{'p':>6}{'n':>5}{'F1':>8}"
          f"{'stab':>8}{'lo':>8}{'hi':>8}{'pMode':>8}")
    for c in curves:
        print(f"{c.method:<15}{c.scope:<8}{c.proportion:>6.2f}{c.n_replicates:>5}"
              f"{_fmt(c.mean_f1):>8}{_fmt(c.stability):>8}{_fmt(c.stability_lower):>8}"
              f"{_fmt(c.stability_upper):>8}{_fmt(c.pmode):>8}")
    print()
    print("Accuracy buckets")
    print(f"{'method':<15}{'scope':<8}{'bucket':<8}{'cells':>6}{'stab':>8}{'pMode':>8}")
    for b in buckets:
        print(f"{b.method:<15}{b.scope:<8}{b.bucket:<8}{b.n_cells:>6}"
              f"{_fmt(b.mean_stability):>8}{_fmt(b.mean_pmode):>8}")
    n_err = sum(not r.ok for r in records)
    if n_err:
        print(f"\n{n_err} failed trials excluded", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "run": cmd_run,
            "metrics": cmd_metrics, "report": cmd_report}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigInvalid, MissingColumn) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RecordsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RECORDS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
