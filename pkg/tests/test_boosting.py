import numpy as np
import pytest

from loadcast import errors
from loadcast.boosting import (
    BoostParams,
    EarlyStopping,
    boosted_predict,
    early_stop_scan,
    fit_sgtb,
    fit_wgtb,
    line_search_gamma,
    negative_gradient,
    predict_at_stage,
)
from loadcast.linear import elasticnet_predict, grid_search_elasticnet
from loadcast.tree import TreeParams


def total_loss(y, F):
    return 0.5 * np.sum((y - F) ** 2)


def golden_section_line_search(y, F, h, lo=-50.0, hi=50.0, iters=200):
    """Golden-section minimization of g -> sum((y - F - g*h)^2).

    The comparison f(c) < f(d) is evaluated through the exact identity
    f(c) - f(d) = (d - c) * sum(h * (2*(y-F) - (c+d)*h)), which sidesteps the
    cancellation that otherwise caps localization at sqrt(machine eps).
    """
    r = y - F
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    for _ in range(iters):
        f_c_minus_f_d = (d - c) * np.sum(h * (2.0 * r - (c + d) * h))
        if f_c_minus_f_d < 0.0:
            b = d
        else:
            a = c
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
    return 0.5 * (a + b)


def toy_problem(seed, n=80, d=4, noise=0.5):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, d))
    y = np.sin(3 * X[:, 0]) + 0.5 * X[:, 1] + noise * rng.normal(size=n)
    return X, y


class TestNegativeGradient:
    def test_definition(self):
        assert negative_gradient(np.array([5.0]), np.array([3.0])).tolist() == [2.0]

    def test_zero_at_fit(self):
        y = np.array([1.0, 2.0, 3.0])
        assert np.all(negative_gradient(y, y) == 0.0)

    def test_matches_finite_differences(self):
        # central differences of the total loss w.r.t. each prediction
        rng = np.random.default_rng(0)
        y = rng.normal(size=12)
        F = rng.normal(size=12)
        grad = np.empty(12)
        h = 1e-5
        for i in range(12):
            up, dn = F.copy(), F.copy()
            up[i] += h
            dn[i] -= h
            grad[i] = (total_loss(y, up) - total_loss(y, dn)) / (2 * h)
        assert np.max(np.abs(negative_gradient(y, F) - (-grad))) < 1e-8

    def test_length_mismatch(self):
        with pytest.raises(errors.LengthMismatch):
            negative_gradient(np.zeros(3), np.zeros(4))


class TestLineSearch:
    def test_perfect_fit_gamma_one(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=20)
        F = rng.normal(size=20)
        h = y - F
        assert line_search_gamma(y, F, h) == pytest.approx(1.0)

    def test_scaled_fit_gamma_half(self):
        rng = np.random.default_rng(2)
        y = rng.normal(size=20)
        F = rng.normal(size=20)
        h = 2.0 * (y - F)
        assert line_search_gamma(y, F, h) == pytest.approx(0.5)

    def test_zero_base_prediction_returns_zero(self):
        y = np.array([1.0, 2.0])
        assert line_search_gamma(y, y * 0.5, np.zeros(2)) == 0.0

    def test_matches_golden_section_oracle(self):
        rng = np.random.default_rng(3)
        for trial in range(100):
            n = int(rng.integers(5, 40))
            y = rng.normal(size=n)
            F = rng.normal(size=n)
            h = rng.normal(size=n)
            gamma = line_search_gamma(y, F, h)
            oracle = golden_section_line_search(y, F, h)
            assert abs(gamma - oracle) < 1e-8


class TestEarlyStopScan:
    def test_strictly_decreasing_returns_last(self):
        assert early_stop_scan([5, 4, 3, 2, 1], patience=2) == 4

    def test_definition_example(self):
        assert early_stop_scan([5, 4, 3, 4, 5, 6], patience=2) == 2

    def test_large_patience_returns_global_min(self):
        curve = [3.0, 4.0, 5.0, 4.5, 2.0, 2.5, 2.2]
        assert early_stop_scan(curve, patience=100) == 4

    def test_ties_return_earliest(self):
        assert early_stop_scan([3, 2, 2, 2, 2], patience=10) == 1

    def test_empty_curve_rejected(self):
        with pytest.raises(errors.EmptyCurve):
            early_stop_scan([], patience=1)


class TestSgtb:
    def test_zero_stages_is_mean(self):
        X, y = toy_problem(4)
        model = fit_sgtb(X, y, BoostParams(n_stages=0))
        assert model.init_value == pytest.approx(y.mean())
        assert np.all(boosted_predict(model, X) == y.mean())

    def test_single_full_tree_fits_exactly(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        params = BoostParams(
            shrinkage=1.0,
            n_stages=1,
            subsample_ratio=1.0,
            tree_params=TreeParams(max_depth=None, min_samples_leaf=1, min_samples_split=2),
        )
        model = fit_sgtb(X, y, params)
        assert np.max(np.abs(boosted_predict(model, X) - y)) < 1e-10
        assert model.train_curve[-1] < 1e-20

    def test_default_schedule_improves_on_constant(self):
        X, y = toy_problem(6, n=120)
        params = BoostParams(shrinkage=0.05, n_stages=70, subsample_ratio=1.0, seed=0)
        model = fit_sgtb(X, y, params)
        assert model.train_curve[-1] < model.train_curve[0]

    def test_monotone_training_loss_full_sample(self):
        for seed in range(5):
            X, y = toy_problem(seed, n=60)
            params = BoostParams(subsample_ratio=1.0, n_stages=25, seed=seed)
            model = fit_sgtb(X, y, params)
            assert np.all(np.diff(model.train_curve) <= 1e-9)

    def test_seed_determinism(self):
        X, y = toy_problem(7)
        params = BoostParams(n_stages=15, subsample_ratio=0.7, seed=99)
        a = fit_sgtb(X, y, params)
        b = fit_sgtb(X, y, params)
        assert np.array_equal(a.train_curve, b.train_curve)
        assert np.array_equal(boosted_predict(a, X), boosted_predict(b, X))

    def test_empty_rejected(self):
        with pytest.raises((errors.EmptyInput, errors.DimensionMismatch)):
            fit_sgtb(np.empty((0, 3)), np.empty(0))


class TestWgtb:
    def test_zero_stages_equals_warm_start_bitwise(self):
        X, y = toy_problem(8, n=100)
        params = BoostParams(base_kind="extratree_bag", n_stages=0)
        model = fit_wgtb(X, y, params, alphas=[0.01, 0.1], rhos=[0.3, 0.7])
        n_fit = 90  # last 10% is the validation slice
        reference, _ = grid_search_elasticnet(
            X[:n_fit], y[:n_fit], X[n_fit:], y[n_fit:], alphas=[0.01, 0.1], rhos=[0.3, 0.7]
        )
        assert np.array_equal(boosted_predict(model, X), elasticnet_predict(reference, X))

    def test_monotone_training_loss_full_sample(self):
        for seed in range(3):
            X, y = toy_problem(seed + 20, n=70)
            params = BoostParams(
                base_kind="extratree_bag", bag_size=3, subsample_ratio=1.0, n_stages=20, seed=seed
            )
            model = fit_wgtb(X, y, params, alphas=[0.1], rhos=[0.5])
            assert np.all(np.diff(model.train_curve) <= 1e-9)

    def test_stage_zero_dominates_constant_model(self):
        X, y = toy_problem(9, n=90)
        params = BoostParams(base_kind="extratree_bag", n_stages=0)
        model = fit_wgtb(X, y, params, alphas=[0.01], rhos=[0.5])
        y_fit = y[:81]
        constant_mse = np.mean((y_fit - y_fit.mean()) ** 2)
        assert model.train_curve[0] <= constant_mse

    def test_truncation_consistency(self):
        X, y = toy_problem(10, n=80)
        params = BoostParams(
            base_kind="extratree_bag", bag_size=2, n_stages=12, subsample_ratio=0.8, seed=4
        )
        model = fit_wgtb(X, y, params, alphas=[0.1], rhos=[0.5])
        X_fit = X[:72]
        y_fit = y[:72]
        for k in range(model.n_stages + 1):
            mse = float(np.mean((y_fit - predict_at_stage(model, X_fit, k)) ** 2))
            assert mse == model.train_curve[k]

    def test_early_stopping_truncates_at_validation_optimum(self):
        X, y = toy_problem(11, n=120, noise=1.5)
        params = BoostParams(
            base_kind="extratree_bag",
            bag_size=2,
            n_stages=40,
            seed=2,
            early_stopping=EarlyStopping(patience=5, validation_fraction=0.2),
        )
        model = fit_wgtb(X, y, params, alphas=[0.01, 1.0], rhos=[0.5])
        assert model.n_stages == int(np.argmin(model.val_curve))
        assert model.val_curve.size == model.n_stages + 1

    def test_seed_determinism(self):
        X, y = toy_problem(12, n=60)
        params = BoostParams(base_kind="extratree_bag", bag_size=2, n_stages=8, seed=77)
        a = fit_wgtb(X, y, params, alphas=[0.1], rhos=[0.5])
        b = fit_wgtb(X, y, params, alphas=[0.1], rhos=[0.5])
        assert np.array_equal(boosted_predict(a, X), boosted_predict(b, X))


class TestBoostedPredict:
    def test_constant_init_no_stages(self):
        X, y = toy_problem(13)
        model = fit_sgtb(X, np.full_like(y, 7.0), BoostParams(n_stages=0))
        assert boosted_predict(model, X[0]) == 7.0

    def test_one_stage_arithmetic(self):
        # init 0, gamma 1, shrinkage 0.05, tree output 10 -> 0.5
        from loadcast.boosting import BoostedModel, BoostStage
        from loadcast.tree import fit_cart

        leaf_ten = fit_cart(np.array([[0.0]]), np.array([10.0]))
        model = BoostedModel(
            init_kind="constant",
            init_value=0.0,
            init_model=None,
            stages=[BoostStage(gamma=1.0, estimator=leaf_ten)],
            params=BoostParams(shrinkage=0.05, n_stages=1),
            train_curve=np.zeros(2),
            val_curve=None,
        )
        assert boosted_predict(model, np.array([3.0])) == 0.5

    def test_staged_sum_matches_manual_accumulation(self):
        X, y = toy_problem(14, n=50)
        params = BoostParams(base_kind="cart", n_stages=6, subsample_ratio=1.0, seed=3)
        model = fit_sgtb(X, y, params)
        manual = model.init_predict(X)
        from loadcast.boosting import _base_predict

        for stage in model.stages:
            manual = manual + params.shrinkage * stage.gamma * _base_predict(stage.estimator, X)
        assert np.array_equal(manual, boosted_predict(model, X))

    def test_dimension_mismatch(self):
        X, y = toy_problem(15)
        model = fit_sgtb(X, y, BoostParams(n_stages=1))
        with pytest.raises(errors.DimensionMismatch):
            boosted_predict(model, np.zeros((3, 9)))
