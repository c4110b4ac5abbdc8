import json
from pathlib import Path

import pytest

from interpstab.cli import main
from interpstab.config import load_config
from interpstab.exceptions import CorruptRecord, SchemaVersionUnsupported
from interpstab.records import read_records

CONFIG = """
seed = 3

[dataset]
path = "{path}"
label = "y"

[experiment]
proportions = [1.0]
replicates = 3
probes = 2
methods = ["logistic+rcm"]
"""


@pytest.fixture
def config_file(tmp_path, small_csv):
    path = tmp_path / "cfg.toml"
    path.write_text(CONFIG.format(path=small_csv.as_posix()))
    return path


def run(config, out, *extra):
    return main(["run", "--config", str(config), "--out", str(out), *extra])


class TestValidate:
    def test_ok(self, small_csv, capsys):
        assert main(["validate", str(small_csv), "--label", "y"]) == 0
        assert "instances: 120" in capsys.readouterr().out

    def test_missing_label(self, small_csv, capsys):
        assert main(["validate", str(small_csv), "--label", "target"]) == 2
        assert "MissingColumn" in capsys.readouterr().err

    def test_single_class(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("a,y\n1,0\n2,0\n")
        assert main(["validate", str(path), "--label", "y"]) == 3

    def test_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["validate"])
        assert err.value.code == 2


class TestRun:
    def test_writes_outputs(self, config_file, tmp_path):
        out = tmp_path / "run"
        assert run(config_file, out) == 0
        lines = (out / "records.jsonl").read_text().splitlines()
        assert len(lines) == 3
        for name in ("manifest.json", "timings.jsonl", "curves.csv",
                     "buckets.csv", "histograms.csv"):
            assert (out / name).exists()

    def test_override_recorded(self, config_file, tmp_path):
        out = tmp_path / "run"
        assert run(config_file, out, "--n", "5", "--seed", "9") == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["experiment"]["replicates"] == 5
        assert manifest["seeds"]["master"] == 9
        assert len(read_records(out / "records.jsonl")) == 5

    def test_rerun_from_manifest(self, config_file, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run(config_file, first) == 0
        assert run(first / "manifest.json", second) == 0
        assert ((first / "records.jsonl").read_bytes()
                == (second / "records.jsonl").read_bytes())

    def test_refuses_non_empty_out(self, config_file, tmp_path):
        out = tmp_path / "run"
        out.mkdir()
        (out / "x").write_text("keep")
        assert run(config_file, out) == 2

    def test_bad_config(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[dataset]\npath = 'x.csv'\n")
        assert main(["run", "--config", str(path)]) == 2

    def test_bad_override(self, config_file, tmp_path):
        assert run(config_file, tmp_path / "o", "--proportions", "0,1.5") == 2

    def test_default_output_root(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("INTERPSTAB_OUTPUT_ROOT", str(tmp_path / "root"))
        assert main(["run", "--config", str(config_file)]) == 0
        (made,) = (tmp_path / "root").iterdir()
        assert (made / "records.jsonl").exists()


class TestMetrics:
    @pytest.fixture
    def run_dir(self, config_file, tmp_path):
        out = tmp_path / "run"
        assert run(config_file, out) == 0
        return out

    def test_recomputed_csvs_identical(self, run_dir, tmp_path):
        again = tmp_path / "again"
        assert main(["metrics", str(run_dir / "records.jsonl"), "--out", str(again)]) == 0
        for name in ("curves.csv", "buckets.csv", "histograms.csv"):
            assert (run_dir / name).read_bytes() == (again / name).read_bytes()

    def test_report(self, run_dir, capsys):
        assert main(["report", str(run_dir / "records.jsonl")]) == 0
        assert "logistic+rcm" in capsys.readouterr().out

    def test_truncated_line(self, run_dir):
        path = run_dir / "records.jsonl"
        text = path.read_text()
        path.write_text(text[:-20])
        with pytest.raises(CorruptRecord) as err:
            read_records(path)
        assert err.value.line == 3
        assert main(["metrics", str(path), "--out", str(run_dir / "m")]) == 4

    def test_empty_records(self, tmp_path, capsys):
        path = tmp_path / "records.jsonl"
        path.write_text("")
        assert main(["metrics", str(path), "--out", str(tmp_path / "m")]) == 4
        assert "NoRecords" in capsys.readouterr().err

    def test_schema_version(self, run_dir):
        path = run_dir / "records.jsonl"
        path.write_text(path.read_text().replace('"schema_version":1', '"schema_version":9'))
        with pytest.raises(SchemaVersionUnsupported):
            read_records(path)


def test_example_config_parses():
    cfg = load_config(Path(__file__).parents[1] / "configs" / "example.toml")
    assert cfg.n_replicates == 200 and len(cfg.methods) == 8
    assert Path(cfg.dataset_path).exists()
