"""Extreme learning machine: frozen random hidden layer, ridge-solved output
weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import SupervisedWindowSet
from ..errors import DimensionMismatch, EmptyInput, SingularSystem
from ..seeding import rng_from
from .base import Forecaster


@dataclass(frozen=True)
class ElmModel:
    hidden_weights: np.ndarray  # (d, L), drawn uniform [-1, 1], immutable
    hidden_biases: np.ndarray   # (L,)
    output_weights: np.ndarray  # (L, n_outputs), the only trained block
    ridge: float


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _hidden(model_or_weights, biases, X):
    return _sigmoid(X @ model_or_weights + biases)


def fit_elm(X, Y, hidden_size: int = 1800, ridge: float = 1e-6, seed: int = 0) -> ElmModel:
    """Draw hidden parameters from the seed, then ridge-solve H B = Y.

    Hidden parameters are drawn one neuron at a time, so a larger network
    shares its first neurons with a smaller one under the same seed.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("need at least one training sample")
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not pair with Y {Y.shape}")
    d = X.shape[1]
    draws = rng_from(seed, "elm").uniform(-1.0, 1.0, size=(hidden_size, d + 1))
    A = draws[:, :d].T
    e = draws[:, d]
    H = _hidden(A, e, X)
    gram = H.T @ H + ridge * np.eye(hidden_size)
    try:
        B = np.linalg.solve(gram, H.T @ Y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(
            "hidden gram matrix is singular; use a positive ridge penalty"
        ) from exc
    return ElmModel(hidden_weights=A, hidden_biases=e, output_weights=B, ridge=float(ridge))


def elm_predict(model: ElmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.hidden_weights.shape[0]:
        raise DimensionMismatch(
            f"expected (n, {model.hidden_weights.shape[0]}) inputs, got {X.shape}"
        )
    return _hidden(model.hidden_weights, model.hidden_biases, X) @ model.output_weights


class ElmForecaster(Forecaster):
    """Holiday flag plus the normalized lookback loads in, 24 hours out."""

    def __init__(self, hidden_size=1800, ridge=1e-6, seed=0, include_holiday=True, include_weekday=False):
        self.hidden_size = hidden_size
        self.ridge = ridge
        self.seed = seed
        self.include_holiday = include_holiday
        self.include_weekday = include_weekday
        self.model: ElmModel | None = None
        self.normalizer = None

    def _features(self, windows):
        return windows.features(
            include_weekday=self.include_weekday, include_holiday=self.include_holiday
        )

    def fit(self, windows: SupervisedWindowSet) -> "ElmForecaster":
        self.normalizer = windows.normalizer
        self.model = fit_elm(
            self._features(windows),
            windows.normalized_targets(),
            hidden_size=self.hidden_size,
            ridge=self.ridge,
            seed=self.seed,
        )
        return self

    def predict_batch(self, windows: SupervisedWindowSet) -> np.ndarray:
        if self.model is None:
            raise EmptyInput("forecaster is not fitted")
        return self.normalizer.denormalize(elm_predict(self.model, self._features(windows)))
