import numpy as np
import pytest

from interpstab import explain
from interpstab.exceptions import EmptyBackground, TooManyFeatures, WidthMismatch
from interpstab.models import (
    AdditiveModel,
    BoostedModel,
    DecisionTree,
    ForestModel,
    LogisticModel,
    Tree,
)
from interpstab.synthetic import make_planted


def stump(feature, n_features=4, threshold=0.0):
    # root with pure children, 10 rows split 5/5
    tree = Tree.from_nodes([
        [feature, threshold, 1, 2, 0.5, 10, 0.5],
        [-1, 0.0, -1, -1, 0.0, 5, 0.0],
        [-1, 0.0, -1, -1, 1.0, 5, 0.0],
    ])
    return DecisionTree.from_tree(tree, n_features)


class StumpForest:
    def __init__(self, trees, n_features):
        self.estimators_ = trees
        self.n_features_in_ = n_features


@pytest.fixture(scope="module")
def planted():
    return make_planted(300, 5, weights=(1.5, -1.0), seed=2)


@pytest.fixture(scope="module")
def fitted(planted):
    X, y = planted.X, planted.y
    return {
        "logistic": LogisticModel().fit(X, y),
        "tree": DecisionTree(max_depth=4).fit(X, y),
        "forest": ForestModel(n_estimators=10, random_state=0).fit(X, y),
        "boosted": BoostedModel(n_estimators=20).fit(X, y),
        "additive": AdditiveModel(n_cycles=10).fit(X, y),
    }


class TestRanks:
    def test_order(self):
        assert explain.rank_features([2.0, 3.0, 0.5]) == (1, 0, 2)

    def test_ties_keep_index_order(self):
        assert explain.rank_features([1.0, 1.0]) == (0, 1)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            explain.rank_features([1.0, np.nan])


class TestCoefficients:
    def test_global_magnitudes(self):
        m = LogisticModel()
        m.coef_ = np.array([2.0, -3.0, 0.5])
        v = explain.rcm_global(m)
        np.testing.assert_array_equal(v.scores, [2.0, 3.0, 0.5])
        assert v.ranks() == (1, 0, 2)

    def test_local_arithmetic(self):
        m = LogisticModel()
        m.coef_ = np.array([2.0, 1.0])
        v = explain.rcm_local(m, [1.0, 4.0])
        np.testing.assert_array_equal(v.scores, [2.0, 4.0])
        assert v.ranks()[0] == 1
        np.testing.assert_array_equal(explain.rcm_local(m, [0.0, 0.0]).scores, 0.0)

    def test_planted_top_feature(self):
        d = make_planted(500, 2, weights=(0.2, 2.0), seed=4)
        assert explain.rcm_global(LogisticModel().fit(d.X, d.y)).ranks()[0] == 1

    def test_local_terms_sum_to_logit(self, fitted, planted):
        m = fitted["logistic"]
        z = m.standardizer_.transform(planted.X[:5])
        np.testing.assert_allclose(z @ m.coef_ + m.intercept_,
                                   m.decision_function(planted.X[:5]), atol=1e-12)


class TestImpurity:
    def test_single_split(self):
        np.testing.assert_array_equal(explain.mdi_global(stump(3)).scores, [0, 0, 0, 1])

    def test_stump_forest_halves(self):
        forest = StumpForest([stump(0, 2).tree_, stump(1, 2).tree_], 2)
        np.testing.assert_allclose(explain.mdi_global(forest).scores, [0.5, 0.5])

    @pytest.mark.parametrize("name", ["tree", "forest", "boosted"])
    def test_normalised(self, fitted, name):
        assert explain.mdi_global(fitted[name]).scores.sum() == pytest.approx(1.0, abs=1e-9)

    def test_no_split_gives_zeros(self):
        leaf = Tree.from_nodes([[-1, 0.0, -1, -1, 1.0, 4, 0.0]])
        np.testing.assert_array_equal(explain.mdi_global(DecisionTree.from_tree(leaf, 3)).scores, 0)


class TestShapley:
    @pytest.mark.parametrize("name", ["logistic", "tree", "forest", "boosted", "additive"])
    def test_local_accuracy(self, fitted, planted, name):
        m = fitted[name]
        bg = planted.X[:30]
        for x in planted.X[100:105]:
            e = explain.shap_exact(m, x, bg)
            f = explain.model_output(m, x[None, :])[0]
            assert e.base_value + e.values.sum() == pytest.approx(f, abs=1e-9)

    def test_linear_oracle(self, fitted, planted):
        m = fitted["logistic"]
        bg = planted.X[:40]
        beta = m.coef_ / m.standardizer_.scale_
        x = planted.X[200]
        e = explain.shap_exact(m, x, bg)
        np.testing.assert_allclose(e.values, beta * (x - bg.mean(axis=0)), atol=1e-9)

    def test_single_player(self):
        model = lambda X: 3.0 * X[:, 0]
        e = explain.shap_exact(model, np.array([2.0]), np.array([[0.0], [1.0]]))
        assert e.values[0] == 6.0 - e.base_value

    def test_ignored_feature_zero(self, planted):
        model = lambda X: X[:, 0] * X[:, 1]
        g = explain.shap_global(model, planted.X[:3], planted.X[:10])
        assert g.scores[4] == pytest.approx(0.0, abs=1e-12)

    def test_interaction_split_evenly(self):
        # symmetric players get equal credit
        model = lambda X: X[:, 0] * X[:, 1]
        e = explain.shap_exact(model, np.array([1.0, 1.0]), np.zeros((1, 2)))
        np.testing.assert_allclose(e.values, [0.5, 0.5])

    def test_consistency(self):
        # raising only feature 0's marginal contribution never lowers its value
        a = lambda X: X[:, 0] + X[:, 1]
        b = lambda X: 2 * X[:, 0] + X[:, 1] + X[:, 0] * X[:, 1]
        x, bg = np.array([1.0, 1.0]), np.zeros((1, 2))
        assert explain.shap_exact(b, x, bg).values[0] >= explain.shap_exact(a, x, bg).values[0]

    def test_cap(self):
        with pytest.raises(TooManyFeatures):
            explain.shap_exact(lambda X: X[:, 0], np.zeros(16), np.zeros((1, 16)))

    def test_empty_background(self):
        with pytest.raises(EmptyBackground):
            explain.shap_exact(lambda X: X[:, 0], np.zeros(2), np.zeros((0, 2)))

    def test_background_width(self):
        with pytest.raises(WidthMismatch):
            explain.shap_exact(lambda X: X[:, 0], np.zeros(2), np.zeros((3, 3)))

    def test_full_enumeration_matches_exact(self, fitted, planted):
        m = fitted["forest"]
        x, bg = planted.X[7], planted.X[:20]
        exact = explain.shap_exact(m, x, bg)
        sampled = explain.shap_sampled(m, x, bg, permutations=explain.all_permutations(5))
        np.testing.assert_allclose(sampled.values, exact.values, atol=1e-12)

    def test_sampled_deterministic(self, fitted, planted):
        m, x, bg = fitted["boosted"], planted.X[3], planted.X[:20]
        a = explain.shap_sampled(m, x, bg, 50, seed=5)
        b = explain.shap_sampled(m, x, bg, 50, seed=5)
        np.testing.assert_array_equal(a.values, b.values)

    def test_sampled_linear_tolerance(self):
        rng = np.random.default_rng(0)
        beta = rng.normal(size=8)
        model = lambda X: X @ beta + 0.3 * X[:, 0] * X[:, 1]
        bg = rng.normal(size=(20, 8))
        x = rng.normal(size=8)
        exact = explain.shap_exact(model, x, bg).values
        sampled = explain.shap_sampled(model, x, bg, 2000, seed=1).values
        assert np.max(np.abs(sampled - exact)) <= 0.05 * np.max(np.abs(exact))

    def test_global_arithmetic(self, monkeypatch):
        phis = iter([np.array([1.0, -3.0]), np.array([3.0, 1.0])])
        monkeypatch.setattr(explain, "shap_exact", lambda *a, **k: explain.ShapleyExplanation(
            0.0, next(phis)))
        g = explain.shap_global(None, np.zeros((2, 2)), np.zeros((1, 2)))
        np.testing.assert_array_equal(g.scores, [2.0, 2.0])


class TestLime:
    def test_constant_model(self, planted):
        class Constant:
            def predict_proba(self, X):
                return np.column_stack([np.full(len(X), 0.3), np.full(len(X), 0.7)])

        e = explain.lime_local(Constant(), planted.X[0], planted.X, seed=0)
        np.testing.assert_allclose(e.coef, 0.0, atol=1e-6)
        assert e.intercept == pytest.approx(0.7)

    def test_dominant_feature(self):
        d = make_planted(400, 2, weights=(3.0,), seed=6)
        m = LogisticModel().fit(d.X, d.y)
        x = np.array([2.0, 2.0])
        e = explain.lime_local(m, x, d.X, seed=1)
        assert abs(e.coef[0]) > abs(e.coef[1])

    def test_deterministic(self, fitted, planted):
        a = explain.lime_local(fitted["forest"], planted.X[1], planted.X, seed=3)
        b = explain.lime_local(fitted["forest"], planted.X[1], planted.X, seed=3)
        np.testing.assert_array_equal(a.coef, b.coef)

    def test_default_width(self, fitted, planted):
        e = explain.lime_local(fitted["tree"], planted.X[1], planted.X, n_samples=50, seed=0)
        assert e.kernel_width == pytest.approx(0.75 * np.sqrt(5))


class TestAdditive:
    def test_global_matches_loop(self, fitted, planted):
        m = fitted["additive"]
        total = np.zeros(planted.n_features)
        for row in planted.X:
            total += np.abs(m.term_contributions(row[None, :])[0])
        np.testing.assert_allclose(explain.additive_explain(m).scores,
                                   total / planted.n_samples, atol=1e-12)

    def test_zero_term(self, planted):
        m = AdditiveModel(n_cycles=5).fit(planted.X, planted.y)
        m.shape_values_[1] = np.zeros_like(m.shape_values_[1])
        assert explain.additive_explain(m).scores[1] == 0.0
        assert explain.additive_explain(m, planted.X[0]).scores[1] == 0.0

    def test_local_magnitude(self, planted):
        m = AdditiveModel(n_cycles=5).fit(planted.X, planted.y)
        m.shape_values_[2] = np.full_like(m.shape_values_[2], -1.5)
        assert explain.additive_explain(m, planted.X[0]).scores[2] == 1.5
