"""Stacked-ensemble plumbing: the juxtaposed submodel outputs, per-hour
second-level regressors, and the bundle that ties a full pipeline together."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import Forest, forest_predict_many
from .boosting import BoostedModel, boosted_predict
from .data import HourlyLoadSeries, NormalizerState, SupervisedWindowSet, make_windows
from .errors import DimensionMismatch
from .linear import ElasticNetModel, elasticnet_predict
from .submodels.base import Forecaster, forecaster_predict

SUBMODEL_ORDER = ("arima", "nusvr", "elm", "lstm")


@dataclass(frozen=True)
class StackingSet:
    """Second-level design matrices: one column block of 24 forecast hours per
    submodel, ordered arima|nusvr|elm|lstm."""

    train_inputs: np.ndarray
    train_targets: np.ndarray
    test_inputs: np.ndarray
    test_targets: np.ndarray
    block_order: tuple = SUBMODEL_ORDER
    horizon: int = 24

    def block(self, name: str, split: str = "train") -> np.ndarray:
        idx = self.block_order.index(name)
        inputs = self.train_inputs if split == "train" else self.test_inputs
        return inputs[:, idx * self.horizon : (idx + 1) * self.horizon]


def build_stacking_set(
    submodels: dict,
    train_windows: SupervisedWindowSet,
    test_windows: SupervisedWindowSet,
) -> StackingSet:
    train_blocks = [forecaster_predict(submodels[name], train_windows) for name in SUBMODEL_ORDER]
    test_blocks = [forecaster_predict(submodels[name], test_windows) for name in SUBMODEL_ORDER]
    return StackingSet(
        train_inputs=np.hstack(train_blocks),
        train_targets=train_windows.targets,
        test_inputs=np.hstack(test_blocks),
        test_targets=test_windows.targets,
        horizon=train_windows.horizon,
    )


def _scalar_predict(model, X) -> np.ndarray:
    if isinstance(model, ElasticNetModel):
        return elasticnet_predict(model, X)
    if isinstance(model, BoostedModel):
        return boosted_predict(model, X)
    if isinstance(model, Forest):
        return forest_predict_many(model, X)
    raise DimensionMismatch(f"unsupported per-hour model type {type(model).__name__}")


@dataclass(frozen=True)
class PerHourModel:
    """One independent scalar regressor per forecast hour."""

    kind: str
    models: list

    def predict(self, X) -> np.ndarray:
        return np.column_stack([_scalar_predict(m, X) for m in self.models])


def fit_per_hour(kind: str, fit_fn, X, targets) -> PerHourModel:
    """Fit `fit_fn(X, y_h)` once per target column."""
    models = [fit_fn(X, targets[:, h], h) for h in range(targets.shape[1])]
    return PerHourModel(kind=kind, models=models)


@dataclass
class HybridBundle:
    """Everything needed to forecast new data: the four submodels, the stacked
    ensemble, and the training normalizer."""

    submodels: dict
    ensemble: PerHourModel
    normalizer: NormalizerState
    lookback: int = 168
    horizon: int = 24
    stride: int = 24

    def predict_windows(self, windows: SupervisedWindowSet) -> np.ndarray:
        blocks = [forecaster_predict(self.submodels[n], windows) for n in SUBMODEL_ORDER]
        return self.ensemble.predict(np.hstack(blocks))

    def predict_series(self, series: HourlyLoadSeries) -> tuple:
        """Forecast every window of a new series; returns (timestamps, forecasts)."""
        windows = make_windows(
            series, self.lookback, self.horizon, self.stride, normalizer=self.normalizer
        )
        return windows.target_start_timestamps(), self.predict_windows(windows)
