from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..data import SupervisedWindowSet
from ..errors import DimensionMismatch


class Forecaster(ABC):
    """Common contract: fit on a window set, forecast the next day per window."""

    @abstractmethod
    def fit(self, windows: SupervisedWindowSet) -> "Forecaster":
        ...

    @abstractmethod
    def predict_batch(self, windows: SupervisedWindowSet) -> np.ndarray:
        """Forecasts in original units, shaped (n_samples, horizon)."""


def forecaster_predict(model: Forecaster, windows: SupervisedWindowSet) -> np.ndarray:
    """Predict and validate the contract: finite values, horizon columns."""
    out = np.asarray(model.predict_batch(windows), dtype=float)
    if out.shape != (windows.n_samples, windows.horizon):
        raise DimensionMismatch(
            f"forecaster returned {out.shape}, expected {(windows.n_samples, windows.horizon)}"
        )
    if not np.isfinite(out).all():
        raise DimensionMismatch("forecaster returned non-finite values")
    return out
