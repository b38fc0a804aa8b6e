import numpy as np
import pytest

from loadcast import errors
from loadcast.baselines import (
    fit_adaboost_r2,
    fit_bag,
    fit_random_forest,
    forest_predict,
    forest_predict_many,
)
from loadcast.tree import TreeParams, fit_cart, tree_predict_many


def fixture_problem(seed, n=60, d=3, noise=0.4):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, d))
    y = 1.5 * X[:, 0] - 0.7 * X[:, 1] + noise * rng.normal(size=n)
    return X, y


class TestBag:
    def test_identical_cart_members_equal_single_cart(self):
        X, y = fixture_problem(0)
        forest = fit_bag(X, y, n_trees=7, base="cart", bootstrap=False, seed=1)
        single = fit_cart(X, y, TreeParams())
        # members are bit-identical; the averaging itself costs at most 1 ulp
        assert np.allclose(
            forest_predict_many(forest, X), tree_predict_many(single, X), rtol=1e-15, atol=0
        )
        for tree in forest.trees:
            assert np.array_equal(tree_predict_many(tree, X), tree_predict_many(single, X))

    def test_single_member_is_that_tree(self):
        X, y = fixture_problem(1)
        forest = fit_bag(X, y, n_trees=1, base="extratree", bootstrap=False, seed=3)
        assert forest_predict(forest, X[0]) == tree_predict_many(forest.trees[0], X[:1])[0]

    def test_seed_determinism(self):
        X, y = fixture_problem(2)
        a = fit_bag(X, y, n_trees=10, base="extratree", seed=5)
        b = fit_bag(X, y, n_trees=10, base="extratree", seed=5)
        assert np.array_equal(forest_predict_many(a, X), forest_predict_many(b, X))

    def test_empty_rejected(self):
        with pytest.raises(errors.EmptyInput):
            fit_bag(np.empty((0, 2)), np.empty(0))


class TestRandomForest:
    def test_degenerates_to_cart(self):
        X, y = fixture_problem(3)
        forest = fit_random_forest(X, y, n_trees=4, max_features=X.shape[1], seed=2, bootstrap=False)
        cart = fit_cart(X, y, TreeParams())
        expected = tree_predict_many(cart, X)
        for tree in forest.trees:
            assert np.array_equal(tree_predict_many(tree, X), expected)

    def test_seed_determinism(self):
        X, y = fixture_problem(4)
        a = fit_random_forest(X, y, n_trees=6, max_features=2, seed=9)
        b = fit_random_forest(X, y, n_trees=6, max_features=2, seed=9)
        assert np.array_equal(forest_predict_many(a, X), forest_predict_many(b, X))

    def test_seed_variance_between_cart_and_extratree(self):
        # spread over seeds: CART (zero) < random forest < single ExtraTree
        X, y = fixture_problem(5, n=40)
        x_query = np.array([0.15, -0.4, 0.3])
        rf_preds = [
            forest_predict(fit_random_forest(X, y, n_trees=3, max_features=2, seed=s), x_query)
            for s in range(200)
        ]
        from loadcast.tree import fit_extratree, tree_predict

        extra_preds = [
            tree_predict(fit_extratree(X, y, TreeParams(), seed=s), x_query) for s in range(200)
        ]
        assert 0.0 < np.var(rf_preds) < np.var(extra_preds)


class TestAdaboost:
    def test_perfect_round_one_stops_with_one_tree(self):
        # constant targets: any resampled tree predicts them exactly, so the
        # first round has zero loss and the loop stops immediately
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([2.0, 2.0, 2.0, 2.0])
        forest = fit_adaboost_r2(X, y, n_trees=25, seed=0)
        assert forest.n_trees == 1
        assert np.array_equal(forest_predict_many(forest, X), y)

    def test_single_round_is_that_tree(self):
        X, y = fixture_problem(6)
        forest = fit_adaboost_r2(X, y, n_trees=1, seed=1)
        assert forest.n_trees == 1
        assert np.array_equal(
            forest_predict_many(forest, X), tree_predict_many(forest.trees[0], X)
        )

    def test_training_mae_non_increasing_early(self):
        # noisy linear fixture; ensemble MAE over the first rounds
        X, y = fixture_problem(7, n=120, noise=0.3)
        forest = fit_adaboost_r2(X, y, n_trees=12, seed=3)
        maes = []
        for k in range(1, min(6, forest.n_trees) + 1):
            truncated = type(forest)(
                trees=forest.trees[:k],
                tree_weights=forest.tree_weights[:k],
                kind="adaboost",
                n_features=forest.n_features,
                params=forest.params,
            )
            maes.append(np.mean(np.abs(forest_predict_many(truncated, X) - y)))
        assert maes[-1] <= maes[0] + 1e-12

    def test_needs_two_samples(self):
        with pytest.raises(errors.EmptyInput):
            fit_adaboost_r2(np.array([[1.0]]), np.array([1.0]))


class TestForestPredict:
    def test_uniform_mean(self):
        X = np.array([[0.0], [1.0]])
        t2 = fit_cart(X, np.array([2.0, 2.0]))
        t4 = fit_cart(X, np.array([4.0, 4.0]))
        from loadcast.baselines import Forest

        forest = Forest(trees=[t2, t4], tree_weights=np.ones(2), kind="bagging", n_features=1)
        assert forest_predict(forest, np.array([0.5])) == 3.0

    def test_weighted_median_definition(self):
        X = np.array([[0.0], [1.0]])
        trees = [fit_cart(X, np.array([v, v])) for v in (1.0, 2.0, 10.0)]
        from loadcast.baselines import Forest

        forest = Forest(
            trees=trees, tree_weights=np.array([1.0, 1.0, 1.0]), kind="adaboost", n_features=1
        )
        # cumulative weight reaches half the total at the middle prediction
        assert forest_predict(forest, np.array([0.5])) == 2.0

    def test_mean_matches_manual_average(self):
        X, y = fixture_problem(8)
        forest = fit_bag(X, y, n_trees=5, base="extratree", seed=11)
        manual = np.mean([tree_predict_many(t, X) for t in forest.trees], axis=0)
        assert np.allclose(forest_predict_many(forest, X), manual, rtol=0, atol=0)

    def test_dimension_mismatch(self):
        X, y = fixture_problem(9)
        forest = fit_bag(X, y, n_trees=2, seed=0)
        with pytest.raises(errors.DimensionMismatch):
            forest_predict(forest, np.zeros(7))
