"""Stacked LSTM forecaster trained by backpropagation through time.

Plain numpy throughout: combined-gate weight matrices per layer, the last
hidden state through one fully connected tanh layer, then a linear output
head sized to the forecast horizon. Trained with Adam on MSE over normalized
targets, with a two-phase learning-rate schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import SupervisedWindowSet
from ..errors import DimensionMismatch, EmptyInput, NonFiniteLoss
from ..seeding import rng_from
from .base import Forecaster


@dataclass(frozen=True)
class LstmConfig:
    n_layers: int = 2
    hidden_size: int = 32        # paper-scale runs use 128
    fc_size: int = 32
    output_size: int = 24
    epochs: tuple = (30, 30)     # paper-scale schedule is (100, 130)
    learning_rates: tuple = (1e-3, 1e-4)
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    include_weekday: bool = True
    include_holiday: bool = True
    include_hour: bool = False


@dataclass
class LstmModel:
    params: dict
    config: LstmConfig
    input_size: int
    train_losses: np.ndarray = field(default_factory=lambda: np.empty(0))


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def init_lstm_params(input_size: int, config: LstmConfig, rng) -> dict:
    """Uniform(-k, k) weights with k = 1/sqrt(fan_in); zero biases."""
    params = {}
    H = config.hidden_size
    fan = input_size
    for layer in range(config.n_layers):
        k = 1.0 / np.sqrt(fan + H)
        params[f"W{layer}"] = rng.uniform(-k, k, size=(4 * H, fan + H))
        params[f"b{layer}"] = np.zeros(4 * H)
        fan = H
    k = 1.0 / np.sqrt(H)
    params["Wfc"] = rng.uniform(-k, k, size=(config.fc_size, H))
    params["bfc"] = np.zeros(config.fc_size)
    k = 1.0 / np.sqrt(config.fc_size)
    params["Wout"] = rng.uniform(-k, k, size=(config.output_size, config.fc_size))
    params["bout"] = np.zeros(config.output_size)
    return params


def _layer_forward(W, b, xs):
    """One LSTM layer over a (B, T, F) sequence; returns hidden states and the
    per-step cache needed for backprop."""
    B, T, _ = xs.shape
    H = W.shape[0] // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, T, H))
    steps = []
    for t in range(T):
        a_cat = np.concatenate([xs[:, t, :], h], axis=1)
        z = a_cat @ W.T + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        hs[:, t, :] = h
        steps.append((a_cat, i, f, g, o, c_prev, tanh_c))
    return hs, steps


def _layer_backward(W, steps, dh_seq, input_size):
    """BPTT through one layer. dh_seq holds the gradient arriving at each
    hidden state from above; returns (dW, db, dx_seq)."""
    B, T, H = dh_seq.shape
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dx_seq = np.empty((B, T, input_size))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        a_cat, i, f, g, o, c_prev, tanh_c = steps[t]
        dh = dh_seq[:, t, :] + dh_next
        do = dh * tanh_c
        dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += dz.T @ a_cat
        db += dz.sum(axis=0)
        da = dz @ W
        dx_seq[:, t, :] = da[:, :input_size]
        dh_next = da[:, input_size:]
    return dW, db, dx_seq


def lstm_forward(params: dict, X, config: LstmConfig):
    """Full forward pass on (B, T, F) inputs; returns (predictions, cache)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise DimensionMismatch(f"expected (batch, time, features), got {X.shape}")
    layer_inputs = []
    layer_steps = []
    seq = X
    for layer in range(config.n_layers):
        layer_inputs.append(seq)
        hs, steps = _layer_forward(params[f"W{layer}"], params[f"b{layer}"], seq)
        layer_steps.append(steps)
        seq = hs
    h_last = seq[:, -1, :]
    fc_pre = h_last @ params["Wfc"].T + params["bfc"]
    fc = np.tanh(fc_pre)
    yhat = fc @ params["Wout"].T + params["bout"]
    cache = (layer_inputs, layer_steps, h_last, fc, X.shape)
    return yhat, cache


def lstm_backward(params: dict, cache, dyhat, config: LstmConfig) -> dict:
    layer_inputs, layer_steps, h_last, fc, x_shape = cache
    B, T, _ = x_shape
    H = config.hidden_size
    grads = {}
    grads["Wout"] = dyhat.T @ fc
    grads["bout"] = dyhat.sum(axis=0)
    dfc = dyhat @ params["Wout"]
    dfc_pre = dfc * (1.0 - fc * fc)
    grads["Wfc"] = dfc_pre.T @ h_last
    grads["bfc"] = dfc_pre.sum(axis=0)
    dh_last = dfc_pre @ params["Wfc"]

    dh_seq = np.zeros((B, T, H))
    dh_seq[:, -1, :] = dh_last
    for layer in range(config.n_layers - 1, -1, -1):
        dW, db, dx_seq = _layer_backward(
            params[f"W{layer}"], layer_steps[layer], dh_seq, layer_inputs[layer].shape[2]
        )
        grads[f"W{layer}"] = dW
        grads[f"b{layer}"] = db
        dh_seq = dx_seq
    return grads


def mse_loss_and_grad(yhat, Y):
    diff = yhat - Y
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size


def train_lstm(X, Y, config: LstmConfig):
    """Minibatch Adam over the two-phase schedule; aborts on non-finite loss."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] == 0:
        raise EmptyInput("need at least one training sample")
    if Y.shape != (X.shape[0], config.output_size):
        raise DimensionMismatch(f"targets {Y.shape} do not match output size {config.output_size}")
    rng = rng_from(config.seed, "lstm-init")
    params = init_lstm_params(X.shape[2], config, rng)
    m_state = {k: np.zeros_like(v) for k, v in params.items()}
    v_state = {k: np.zeros_like(v) for k, v in params.items()}
    shuffle_rng = rng_from(config.seed, "lstm-shuffle")
    n = X.shape[0]
    step = 0
    losses = []
    total_epochs = sum(config.epochs)
    for epoch in range(total_epochs):
        lr = config.learning_rates[0] if epoch < config.epochs[0] else config.learning_rates[1]
        perm = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            yhat, cache = lstm_forward(params, X[idx], config)
            loss, dyhat = mse_loss_and_grad(yhat, Y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"training diverged at epoch {epoch}, batch {start // config.batch_size} "
                    f"(loss={loss})"
                )
            epoch_loss += loss * idx.size
            grads = lstm_backward(params, cache, dyhat, config)
            step += 1
            bias1 = 1.0 - config.beta1**step
            bias2 = 1.0 - config.beta2**step
            for key, g in grads.items():
                m_state[key] = config.beta1 * m_state[key] + (1.0 - config.beta1) * g
                v_state[key] = config.beta2 * v_state[key] + (1.0 - config.beta2) * (g * g)
                params[key] = params[key] - lr * (m_state[key] / bias1) / (
                    np.sqrt(v_state[key] / bias2) + config.adam_eps
                )
        losses.append(epoch_loss / n)
    return params, np.asarray(losses)


def fit_lstm(windows: SupervisedWindowSet, config: LstmConfig = LstmConfig()) -> "LstmForecaster":
    return LstmForecaster(config).fit(windows)


class LstmForecaster(Forecaster):
    def __init__(self, config: LstmConfig = LstmConfig()):
        self.config = config
        self.model: LstmModel | None = None
        self.normalizer = None

    def _features(self, windows):
        return windows.sequence_features(
            include_weekday=self.config.include_weekday,
            include_holiday=self.config.include_holiday,
            include_hour=self.config.include_hour,
        )

    def fit(self, windows: SupervisedWindowSet) -> "LstmForecaster":
        self.normalizer = windows.normalizer
        X = self._features(windows)
        Y = windows.normalized_targets()
        params, losses = train_lstm(X, Y, self.config)
        self.model = LstmModel(
            params=params, config=self.config, input_size=X.shape[2], train_losses=losses
        )
        return self

    def predict_batch(self, windows: SupervisedWindowSet) -> np.ndarray:
        if self.model is None:
            raise EmptyInput("forecaster is not fitted")
        yhat, _ = lstm_forward(self.model.params, self._features(windows), self.config)
        return self.normalizer.denormalize(yhat)
