import numpy as np
import pytest

from loadcast import errors
from loadcast.data import make_windows, split_train_test
from loadcast.evaluation import SyntheticLoadSpec, generate_synthetic
from loadcast.seeding import rng_from
from loadcast.submodels import ElmForecaster, ElmModel, elm_predict, fit_elm
from loadcast.submodels.base import forecaster_predict
from loadcast.submodels.elm import _hidden


class TestFit:
    def test_same_seed_identical(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(30, 4))
        Y = rng.normal(size=(30, 3))
        a = fit_elm(X, Y, hidden_size=20, seed=5)
        b = fit_elm(X, Y, hidden_size=20, seed=5)
        assert np.array_equal(a.output_weights, b.output_weights)
        assert np.array_equal(elm_predict(a, X), elm_predict(b, X))

    def test_hidden_parameters_untouched_by_training(self):
        # the solver touches only the output weights: hidden draws equal the
        # raw substream draws for the same seed
        rng = np.random.default_rng(1)
        X = rng.normal(size=(25, 3))
        Y = rng.normal(size=(25, 2))
        model = fit_elm(X, Y, hidden_size=10, seed=9)
        draws = rng_from(9, "elm").uniform(-1.0, 1.0, size=(10, 4))
        assert np.array_equal(model.hidden_weights, draws[:, :3].T)
        assert np.array_equal(model.hidden_biases, draws[:, 3])

    def test_targets_in_hidden_span_fit_exactly(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 3))
        probe = fit_elm(X, np.zeros((40, 1)), hidden_size=15, seed=3)
        H = _hidden(probe.hidden_weights, probe.hidden_biases, X)
        B_true = rng.normal(size=(15, 2))
        Y = H @ B_true
        model = fit_elm(X, Y, hidden_size=15, ridge=1e-10, seed=3)
        assert np.mean((elm_predict(model, X) - Y) ** 2) < 1e-8

    def test_training_mse_decreases_with_width(self):
        # same seed nests the hidden layer, so wider spans can only help
        series, _ = generate_synthetic(SyntheticLoadSpec(days=20, seed=11, holiday_days=(6,)))
        windows = make_windows(series)
        X = windows.features(include_holiday=True)
        Y = windows.normalized_targets()
        mses = []
        for width in (50, 200, 800):
            model = fit_elm(X, Y, hidden_size=width, ridge=1e-6, seed=4)
            mses.append(float(np.mean((elm_predict(model, X) - Y) ** 2)))
        assert mses[0] > mses[1] > mses[2]

    def test_singular_system_without_ridge(self):
        X = np.zeros((3, 2))  # constant hidden activations: rank-1 gram
        Y = np.ones((3, 1))
        with pytest.raises(errors.SingularSystem):
            fit_elm(X, Y, hidden_size=5, ridge=0.0, seed=0)

    def test_empty_rejected(self):
        with pytest.raises(errors.EmptyInput):
            fit_elm(np.empty((0, 2)), np.empty((0, 1)))


class TestForecasterContract:
    def test_zero_output_weights_denormalize_to_constant(self):
        series, _ = generate_synthetic(SyntheticLoadSpec(days=16, seed=12, holiday_days=(3,)))
        windows = make_windows(series)
        fc = ElmForecaster(hidden_size=8, seed=1).fit(windows)
        fc.model = ElmModel(
            hidden_weights=fc.model.hidden_weights,
            hidden_biases=fc.model.hidden_biases,
            output_weights=np.zeros_like(fc.model.output_weights),
            ridge=fc.model.ridge,
        )
        preds = fc.predict_batch(windows)
        expected = windows.normalizer.denormalize(0.0)
        assert np.all(preds == expected)

    def test_windows_roundtrip(self):
        series, _ = generate_synthetic(SyntheticLoadSpec(days=20, seed=13, holiday_days=(8,)))
        windows = make_windows(series)
        train, test = split_train_test(windows, train_days=14)
        fc = ElmForecaster(hidden_size=64, seed=2).fit(train)
        preds = forecaster_predict(fc, test)
        assert preds.shape == (test.n_samples, 24)
        again = forecaster_predict(ElmForecaster(hidden_size=64, seed=2).fit(train), test)
        assert np.array_equal(preds, again)
