"""Persistence: trial records as JSON Lines, aggregates as CSV.

``records.jsonl`` holds one JSON object per trial with sorted keys and a
``schema_version`` field. CSV files carry a header row; floats are written
in shortest round-trip form and missing values as empty cells, so
recomputing aggregates from the same records gives byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

from .exceptions import CorruptRecord, NoRecords, RecordsError, SchemaVersionUnsupported
from .harness import SCHEMA_VERSION, TrialRecord

SUPPORTED_SCHEMAS = {1}

_REQUIRED = ("dataset", "method", "proportion", "p_index", "replicate", "seed",
             "f1", "global_rank", "local_ranks", "error")


def dump_record(rec):
    return json.dumps(rec.to_json(), sort_keys=True, separators=(",", ":"))


def write_records(path, records):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dump_record(rec) + "\n")


def _parse(line_no, line):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptRecord(line_no, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CorruptRecord(line_no, "record is not an object")
    version = obj.get("schema_version")
    if version not in SUPPORTED_SCHEMAS:
        raise SchemaVersionUnsupported(
            f"line {line_no}: schema_version {version!r} not in {sorted(SUPPORTED_SCHEMAS)}")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise CorruptRecord(line_no, f"missing fields {missing}")
    try:
        g = obj["global_rank"]
        loc = obj["local_ranks"]
        return TrialRecord(
            dataset=str(obj["dataset"]),
            method=str(obj["method"]),
            proportion=float(obj["proportion"]),
            p_index=int(obj["p_index"]),
            replicate=int(obj["replicate"]),
            seed=int(obj["seed"]),
            f1=None if obj["f1"] is None else float(obj["f1"]),
            global_rank=None if g is None else tuple(g),
            local_ranks=None if loc is None else tuple(tuple(r) for r in loc),
            error=obj["error"],
        )
    except (TypeError, ValueError) as exc:
        raise CorruptRecord(line_no, str(exc)) from None


def read_records(path):
    """Parse ``records.jsonl``; line numbers in errors start at 1."""
    records = []
    try:
        fh = Path(path).open(encoding="utf-8")
    except OSError as exc:
        raise RecordsError(f"cannot read {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(_parse(line_no, line))
    if not records:
        raise NoRecords(f"{path} contains no records")
    return records


def _cell(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, rows, row_type):
    names = [f.name for f in dataclasses.fields(row_type)]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_cell(getattr(row, n)) for n in names])


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


__all__ = ["SCHEMA_VERSION", "read_records", "write_csv", "write_json",
           "write_records", "dump_record"]
