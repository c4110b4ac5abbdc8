import pytest

from interpstab.config import ExperimentConfig
from interpstab.synthetic import make_planted, write_dataset

SMALL_MODELS = {
    "forest": {"n_estimators": 5, "max_depth": 4},
    "boosted": {"n_estimators": 10},
    "additive": {"n_cycles": 5},
}


@pytest.fixture(scope="session")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "planted.csv"
    write_dataset(make_planted(120, 4, weights=(2.0, -1.0), seed=0), path)
    return path


@pytest.fixture
def small_config(small_csv):
    def build(**overrides):
        params = dict(dataset_path=str(small_csv), label_column="y",
                      proportions=(0.5, 1.0), n_replicates=3, n_probes=2,
                      methods=("logistic+rcm", "forest+mdi", "forest+lime"),
                      models=SMALL_MODELS,
                      explainers={"lime_samples": 100, "shap_background": 10,
                                  "shap_global_instances": 3})
        params.update(overrides)
        return ExperimentConfig(**params)
    return build


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE = {}
N_CRITERIA = 12


@pytest.fixture
def criterion():
    """Record an acceptance result; the session prints one line per criterion."""
    def record(number, title, ok, detail=""):
        ACCEPTANCE[number] = (title, bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, N_CRITERIA + 1):
        if number in ACCEPTANCE:
            title, ok, detail = ACCEPTANCE[number]
            line = f"{'PASS' if ok else 'FAIL'} {number:>2}. {title}"
            terminalreporter.write_line(f"{line}  {detail}".rstrip())
        else:
            terminalreporter.write_line(f"FAIL {number:>2}. not evaluated (test errored or deselected)")
