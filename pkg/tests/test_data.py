import numpy as np
import pytest

from interpstab.data import (
    Dataset,
    Standardizer,
    apply_standardizer,
    fit_standardizer,
    load_csv,
    subsample_bootstrap,
    train_test_split,
)
from interpstab.exceptions import (
    CannotStratify,
    DatasetLoad,
    EmptyDataset,
    MissingColumn,
    ParseError,
    SingleClassDataset,
    WidthMismatch,
)


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def balanced(m, p=2, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(rng.normal(size=(m, p)), np.arange(m) % 2,
                   tuple(f"f{j}" for j in range(p)))


class TestLoadCsv:
    def test_parses_and_drops_label(self, tmp_path):
        d = load_csv(write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n"), "y")
        assert d.feature_names == ("a", "b")
        assert d.X.shape == (4, 2)
        np.testing.assert_array_equal(d.y, [0, 1, 0, 1])

    def test_label_in_middle_keeps_column_order(self, tmp_path):
        d = load_csv(write(tmp_path, "a,y,b\n1,0,2\n3,1,4\n"), "y")
        assert d.feature_names == ("a", "b")
        np.testing.assert_array_equal(d.X, [[1, 2], [3, 4]])

    def test_bad_label(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_csv(write(tmp_path, "a,y\n1,0\n2,2\n"), "y")
        assert err.value.row == 2

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_csv(write(tmp_path, "a,y\n1,0\nfoo,1\n"), "y")
        assert err.value.col == "a"

    def test_single_class(self, tmp_path):
        with pytest.raises(SingleClassDataset):
            load_csv(write(tmp_path, "a,y\n1,0\n2,0\n"), "y")

    def test_missing_column(self, tmp_path):
        with pytest.raises(MissingColumn):
            load_csv(write(tmp_path, "a,b\n1,0\n"), "y")

    def test_header_only(self, tmp_path):
        with pytest.raises(EmptyDataset):
            load_csv(write(tmp_path, "a,y\n"), "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetLoad):
            load_csv(tmp_path / "nope.csv", "y")


class TestSplit:
    def test_sizes(self):
        s = train_test_split(balanced(10), 0.7, seed=3)
        assert s.train.n_samples == 7 and s.test.n_samples == 3

    def test_deterministic(self):
        d = balanced(50)
        a, b = train_test_split(d, 0.7, 11), train_test_split(d, 0.7, 11)
        np.testing.assert_array_equal(a.train_rows, b.train_rows)

    def test_disjoint_cover(self):
        s = train_test_split(balanced(100), 0.7, 1)
        rows = np.concatenate([s.train_rows, s.test_rows])
        np.testing.assert_array_equal(np.sort(rows), np.arange(100))

    def test_both_classes_each_side(self):
        s = train_test_split(balanced(100), 0.7, 5)
        assert set(s.train.y) == {0, 1} and set(s.test.y) == {0, 1}

    def test_cannot_stratify(self):
        y = np.zeros(20, dtype=int)
        y[0] = 1
        d = Dataset(np.zeros((20, 1)), y, ("a",))
        with pytest.raises(CannotStratify):
            train_test_split(d, 0.7, 0)


class TestBootstrap:
    def test_size_with_duplicates(self):
        sample = subsample_bootstrap(balanced(100), 0.3, seed=0)
        assert sample.n_samples == 30

    def test_full_proportion(self):
        sample = subsample_bootstrap(balanced(100), 1.0, seed=0)
        assert sample.n_samples == 100
        assert np.unique(sample.X, axis=0).shape[0] < 100

    def test_seed_changes_sample(self):
        d = balanced(100)
        a = subsample_bootstrap(d, 0.5, 1)
        b = subsample_bootstrap(d, 0.5, 2)
        assert not np.array_equal(np.sort(a.X[:, 0]), np.sort(b.X[:, 0]))

    def test_deterministic(self):
        d = balanced(100)
        np.testing.assert_array_equal(subsample_bootstrap(d, 0.5, 7).X,
                                      subsample_bootstrap(d, 0.5, 7).X)


class TestStandardizer:
    def test_zero_mean_unit_std(self):
        d = Dataset(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]), [0, 1, 0], ("a", "b"))
        z = apply_standardizer(fit_standardizer(d), d).X
        assert abs(z[:, 0].mean()) < 1e-12
        assert z[:, 0].std() == pytest.approx(1.0)
        np.testing.assert_array_equal(z[:, 1], 0.0)

    def test_uses_training_statistics(self):
        train = balanced(40, seed=1)
        test = Dataset(train.X[:10] + 3.0, train.y[:10], train.feature_names)
        z = apply_standardizer(fit_standardizer(train), test).X
        assert np.all(z.mean(axis=0) > 1.0)

    def test_width_mismatch(self):
        s = Standardizer().fit(np.ones((3, 2)))
        with pytest.raises(WidthMismatch):
            s.transform(np.ones((3, 3)))
