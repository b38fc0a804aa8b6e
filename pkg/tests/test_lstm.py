import numpy as np
import pytest

from loadcast import errors
from loadcast.data import make_windows, split_train_test
from loadcast.evaluation import SyntheticLoadSpec, generate_synthetic
from loadcast.submodels import LstmConfig, LstmForecaster
from loadcast.submodels.base import forecaster_predict
from loadcast.submodels.lstm import (
    init_lstm_params,
    lstm_backward,
    lstm_forward,
    mse_loss_and_grad,
    train_lstm,
)

TINY = LstmConfig(n_layers=2, hidden_size=2, fc_size=3, output_size=2, seed=0)


def numeric_gradient(params, key, X, Y, config, step=1e-5):
    grad = np.zeros_like(params[key])
    flat = params[key].ravel()
    grad_flat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up, _ = mse_loss_and_grad(lstm_forward(params, X, config)[0], Y)
        flat[i] = orig - step
        dn, _ = mse_loss_and_grad(lstm_forward(params, X, config)[0], Y)
        flat[i] = orig
        grad_flat[i] = (up - dn) / (2.0 * step)
    return grad


class TestGradients:
    def test_bptt_matches_central_differences(self):
        # tiny double-precision network: 2 units, 3 timesteps, every tensor
        rng = np.random.default_rng(0)
        X = rng.normal(size=(2, 3, 2))
        Y = rng.normal(size=(2, TINY.output_size))
        params = init_lstm_params(2, TINY, rng)
        yhat, cache = lstm_forward(params, X, TINY)
        _, dyhat = mse_loss_and_grad(yhat, Y)
        analytic = lstm_backward(params, cache, dyhat, TINY)
        assert set(analytic) == set(params)
        worst = 0.0
        for key in params:
            numeric = numeric_gradient(params, key, X, Y, TINY)
            denom = np.maximum(np.abs(analytic[key]) + np.abs(numeric), 1e-6)
            worst = max(worst, float(np.max(np.abs(analytic[key] - numeric) / denom)))
        assert worst < 1e-4


class TestForward:
    def test_zero_parameters_output_bias(self):
        params = init_lstm_params(2, TINY, np.random.default_rng(1))
        for key in params:
            params[key] = np.zeros_like(params[key])
        params["bout"] = np.array([4.0, -1.0])
        X = np.random.default_rng(2).normal(size=(3, 3, 2))
        yhat, _ = lstm_forward(params, X, TINY)
        assert np.all(yhat == np.array([4.0, -1.0]))

    def test_rejects_flat_inputs(self):
        params = init_lstm_params(2, TINY, np.random.default_rng(3))
        with pytest.raises(errors.DimensionMismatch):
            lstm_forward(params, np.zeros((3, 2)), TINY)


class TestTraining:
    def test_loss_decreases_on_learnable_signal(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(40, 6, 1))
        Y = X[:, -1, :] * 0.5 + 0.25
        Y = np.repeat(Y, 2, axis=1)
        config = LstmConfig(
            n_layers=1, hidden_size=8, fc_size=8, output_size=2, epochs=(15, 5), seed=5
        )
        _, losses = train_lstm(X, Y, config)
        assert losses[-1] < losses[0]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(20, 5, 2))
        Y = rng.normal(size=(20, 2))
        config = LstmConfig(n_layers=1, hidden_size=4, fc_size=4, output_size=2, epochs=(3, 2), seed=9)
        params_a, losses_a = train_lstm(X, Y, config)
        params_b, losses_b = train_lstm(X, Y, config)
        assert np.array_equal(losses_a, losses_b)
        for key in params_a:
            assert np.array_equal(params_a[key], params_b[key])

    def test_non_finite_loss_guard(self):
        X = np.full((4, 3, 1), np.nan)
        Y = np.zeros((4, 2))
        config = LstmConfig(n_layers=1, hidden_size=2, fc_size=2, output_size=2, epochs=(1, 0), seed=0)
        with pytest.raises(errors.NonFiniteLoss):
            train_lstm(X, Y, config)


class TestForecasterContract:
    def test_windows_roundtrip(self):
        series, _ = generate_synthetic(SyntheticLoadSpec(days=16, seed=6, holiday_days=(4,)))
        windows = make_windows(series)
        train, test = split_train_test(windows, train_days=11)
        config = LstmConfig(hidden_size=6, fc_size=6, epochs=(2, 1), seed=3)
        fc = LstmForecaster(config).fit(train)
        preds = forecaster_predict(fc, test)
        assert preds.shape == (test.n_samples, 24)
        again = forecaster_predict(LstmForecaster(config).fit(train), test)
        assert np.array_equal(preds, again)

    def test_input_flags_change_feature_width(self):
        series, _ = generate_synthetic(SyntheticLoadSpec(days=12, seed=7, holiday_days=(2,)))
        windows = make_windows(series)
        fc_all = LstmForecaster(LstmConfig(include_weekday=True, include_holiday=True, include_hour=True))
        fc_none = LstmForecaster(LstmConfig(include_weekday=False, include_holiday=False, include_hour=False))
        assert fc_all._features(windows).shape[2] == 1 + 7 + 1 + 24
        assert fc_none._features(windows).shape[2] == 1
