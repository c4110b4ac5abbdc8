"""Experiment configuration: TOML loading, defaults and validation.

Layout of a config file (see ``configs/example.toml`` for an annotated copy)::

    seed = 0

    [dataset]
    path = "data.csv"
    label = "y"

    [experiment]
    proportions = [0.1, 0.2, ...]
    replicates = 200
    probes = 5
    methods = ["logistic+rcm", ...]

    [models.forest]
    n_estimators = 100

    [explainers]
    lime_samples = 1000

    [metrics]
    k = 10

A run manifest (JSON) stores the same structure under its ``config`` key and
can be passed wherever a config file is expected.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigInvalid
from .models import MODEL_CLASSES

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class MethodSpec:
    """A model paired with an explainer, plus the ranking scopes it yields."""

    method_id: str
    model: str
    explainer: str
    global_scope: bool
    local_scope: bool

    @property
    def scopes(self):
        return tuple(s for s, on in (("global", self.global_scope),
                                     ("local", self.local_scope)) if on)


METHODS = {
    m.method_id: m for m in (
        MethodSpec("logistic+rcm", "logistic", "rcm", True, True),
        MethodSpec("forest+mdi", "forest", "mdi", True, False),
        MethodSpec("forest+shap", "forest", "shap", True, True),
        MethodSpec("forest+lime", "forest", "lime", False, True),
        MethodSpec("boosted+mdi", "boosted", "mdi", True, False),
        MethodSpec("boosted+shap", "boosted", "shap", True, True),
        MethodSpec("boosted+lime", "boosted", "lime", False, True),
        MethodSpec("additive+self", "additive", "self", True, True),
    )
}
METHOD_ORDER = tuple(METHODS)

DEFAULT_PROPORTIONS = tuple(round(0.1 * i, 10) for i in range(1, 11))

DEFAULT_EXPLAINERS = {
    "shap_exact_max_features": 15,
    "shap_permutations": 500,
    "shap_background": 50,
    "shap_global_instances": 20,
    "lime_samples": 1000,
    "lime_kernel_width": None,
    "lime_ridge": 1.0,
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    label_column: str
    dataset_id: str | None = None
    train_fraction: float = 0.7
    proportions: tuple = DEFAULT_PROPORTIONS
    n_replicates: int = 200
    n_probes: int = 5
    methods: tuple = METHOD_ORDER
    models: dict = field(default_factory=dict)
    explainers: dict = field(default_factory=lambda: dict(DEFAULT_EXPLAINERS))
    seed: int = 0
    k: int = 10
    bucket_edges: tuple = (0.5, 0.65, 0.8, 1.0)
    percentiles: tuple = (10.0, 90.0)
    histogram_bins: int = 20
    output_dir: str | None = None

    def __post_init__(self):
        if self.dataset_id is None:
            object.__setattr__(self, "dataset_id", Path(self.dataset_path).stem)
        explainers = dict(DEFAULT_EXPLAINERS)
        explainers.update(self.explainers or {})
        object.__setattr__(self, "explainers", explainers)
        object.__setattr__(self, "proportions", tuple(float(p) for p in self.proportions))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "bucket_edges", tuple(float(e) for e in self.bucket_edges))
        object.__setattr__(self, "percentiles", tuple(float(q) for q in self.percentiles))
        self.validate()

    def validate(self):
        def fail(msg):
            raise ConfigInvalid(msg)

        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            fail("seed must be an integer")
        if not self.proportions:
            fail("proportions must not be empty")
        if any(not 0 < p <= 1 for p in self.proportions):
            fail("proportions must lie in (0, 1]")
        if not 0 < self.train_fraction < 1:
            fail("train_fraction must lie in (0, 1)")
        if not isinstance(self.n_replicates, int) or self.n_replicates < 2:
            fail("replicates must be an integer >= 2")
        if not isinstance(self.n_probes, int) or self.n_probes < 1:
            fail("probes must be a positive integer")
        if not self.methods:
            fail("methods must not be empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            fail(f"unknown methods {unknown}; choose from {list(METHOD_ORDER)}")
        if len(set(self.methods)) != len(self.methods):
            fail("methods must not repeat")
        for name, params in self.models.items():
            if name not in MODEL_CLASSES:
                fail(f"unknown model section [models.{name}]")
            valid = MODEL_CLASSES[name]().get_params()
            bad = set(params) - set(valid)
            if bad:
                fail(f"[models.{name}] has unknown keys {sorted(bad)}")
        bad = set(self.explainers) - set(DEFAULT_EXPLAINERS)
        if bad:
            fail(f"[explainers] has unknown keys {sorted(bad)}")
        if not isinstance(self.k, int) or self.k < 1:
            fail("k must be a positive integer")
        edges = self.bucket_edges
        if len(edges) != 4 or any(a >= b for a, b in zip(edges, edges[1:])):
            fail("bucket_edges must be 4 increasing values")
        if len(self.percentiles) != 2 or not 0 <= self.percentiles[0] <= self.percentiles[1] <= 100:
            fail("percentiles must be an increasing pair in [0, 100]")
        if not isinstance(self.histogram_bins, int) or self.histogram_bins < 2:
            fail("histogram_bins must be an integer >= 2")

    @property
    def method_specs(self):
        return [METHODS[m] for m in self.methods]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return {
            "seed": self.seed,
            "dataset": {
                "path": self.dataset_path,
                "label": self.label_column,
                "id": self.dataset_id,
                "train_fraction": self.train_fraction,
            },
            "experiment": {
                "proportions": list(self.proportions),
                "replicates": self.n_replicates,
                "probes": self.n_probes,
                "methods": list(self.methods),
            },
            "models": copy.deepcopy(self.models),
            "explainers": dict(self.explainers),
            "metrics": {
                "k": self.k,
                "bucket_edges": list(self.bucket_edges),
                "percentiles": list(self.percentiles),
                "histogram_bins": self.histogram_bins,
            },
            "output": {"dir": self.output_dir},
        }


_SECTIONS = {"seed", "dataset", "experiment", "models", "explainers", "metrics", "output"}


def from_dict(data, base_dir=None):
    """Build a config from the nested layout; relative dataset paths resolve
    against ``base_dir``."""
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a table")
    extra = set(data) - _SECTIONS
    if extra:
        raise ConfigInvalid(f"unknown top-level keys {sorted(extra)}")

    def section(name):
        value = data.get(name, {})
        if not isinstance(value, dict):
            raise ConfigInvalid(f"[{name}] must be a table")
        return value

    ds, ex, met, out = (section(s) for s in ("dataset", "experiment", "metrics", "output"))
    for name, sec, allowed in (
        ("dataset", ds, {"path", "label", "id", "train_fraction"}),
        ("experiment", ex, {"proportions", "replicates", "probes", "methods"}),
        ("metrics", met, {"k", "bucket_edges", "percentiles", "histogram_bins"}),
        ("output", out, {"dir"}),
    ):
        bad = set(sec) - allowed
        if bad:
            raise ConfigInvalid(f"[{name}] has unknown keys {sorted(bad)}")
    if "path" not in ds or "label" not in ds:
        raise ConfigInvalid("[dataset] needs both 'path' and 'label'")

    path = Path(ds["path"])
    if base_dir is not None and not path.is_absolute():
        path = (Path(base_dir) / path).resolve()

    kwargs = {
        "dataset_path": str(path),
        "label_column": ds["label"],
        "dataset_id": ds.get("id"),
        "models": {k: dict(v) for k, v in section("models").items()},
        "explainers": section("explainers"),
        "output_dir": out.get("dir"),
    }
    optional = {
        "seed": data.get("seed"),
        "train_fraction": ds.get("train_fraction"),
        "proportions": ex.get("proportions"),
        "n_replicates": ex.get("replicates"),
        "n_probes": ex.get("probes"),
        "methods": ex.get("methods"),
        "k": met.get("k"),
        "bucket_edges": met.get("bucket_edges"),
        "percentiles": met.get("percentiles"),
        "histogram_bins": met.get("histogram_bins"),
    }
    kwargs.update({k: v for k, v in optional.items() if v is not None})
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(str(exc)) from exc


def load_config(path):
    """Read a TOML config file or a JSON run manifest."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from exc
        if "config" in data:
            data = data["config"]
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from exc
    return from_dict(data, base_dir=path.parent)
