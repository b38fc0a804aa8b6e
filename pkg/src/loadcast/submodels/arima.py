"""ARIMA(p,d,q) fitted by conditional sum of squares with Nelder-Mead."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.signal import lfilter

from ..data import SupervisedWindowSet
from ..errors import EmptyInput, InsufficientHistory, InvalidHyperparameter
from .base import Forecaster

STATIONARITY_BOUND = 0.999


@dataclass(frozen=True)
class ArimaModel:
    p: int
    d: int
    q: int
    c: float
    phi: np.ndarray    # AR coefficients, length p
    theta: np.ndarray  # MA coefficients, length q
    residuals: np.ndarray  # conditional one-step errors on the training series
    clamped: bool = False  # true when |phi| or |theta| hit the stability bound


def _difference(values, d):
    z = np.asarray(values, dtype=float)
    for _ in range(d):
        z = np.diff(z)
    return z


def _css_residuals(z, c, phi, theta):
    """One-step errors for t >= p, with presample values and errors fixed at
    zero. Uses a linear filter for the MA recursion."""
    p, q = phi.size, theta.size
    n = z.size
    rhs = z[p:] - c
    for i in range(p):
        rhs = rhs - phi[i] * z[p - 1 - i : n - 1 - i]
    if q == 0:
        return rhs
    return lfilter([1.0], np.concatenate(([1.0], theta)), rhs)


def _clamp(coefs):
    clipped = np.clip(coefs, -STATIONARITY_BOUND, STATIONARITY_BOUND)
    return clipped, bool(np.any(clipped != coefs))


def fit_arima(values, orders=(1, 1, 1)) -> ArimaModel:
    """Estimate (c, phi, theta) by minimizing the conditional sum of squared
    one-step errors. Coefficients at or beyond the unit circle are clamped to
    +/-0.999 and flagged."""
    p, d, q = orders
    if p < 0 or q < 0 or d < 0:
        raise InvalidHyperparameter(f"orders must be non-negative, got {orders}")
    values = np.asarray(values, dtype=float)
    if values.size <= 10:
        raise EmptyInput(f"need more than 10 observations, have {values.size}")
    z = _difference(values, d)
    if z.size <= p + q + 1:
        raise EmptyInput("differenced series too short for the requested orders")

    # moment-based starting point: lag-1 autocorrelation for the AR part
    zc = z - z.mean()
    denom = float(zc @ zc)
    rho1 = float(zc[1:] @ zc[:-1]) / denom if denom > 0 else 0.0
    x0 = np.concatenate([[z.mean()], np.full(p, np.clip(rho1, -0.5, 0.5)), np.zeros(q)])

    def css(theta_vec):
        c = theta_vec[0]
        phi = theta_vec[1 : 1 + p]
        theta = theta_vec[1 + p :]
        eps = _css_residuals(z, c, phi, theta)
        return float(eps @ eps)

    result = optimize.minimize(css, x0, method="Nelder-Mead", options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 4000})
    c = float(result.x[0])
    phi, clamped_ar = _clamp(result.x[1 : 1 + p])
    theta, clamped_ma = _clamp(result.x[1 + p :])
    residuals = _css_residuals(z, c, phi, theta)
    return ArimaModel(
        p=p,
        d=d,
        q=q,
        c=c,
        phi=phi,
        theta=theta,
        residuals=residuals,
        clamped=clamped_ar or clamped_ma,
    )


def arima_forecast(model: ArimaModel, history, horizon: int = 24) -> np.ndarray:
    """Recursive multi-step forecast: future shocks are zero on the differenced
    scale, then the forecast is cumulatively undifferenced."""
    history = np.asarray(history, dtype=float)
    if history.size < model.p + model.d + 1:
        raise InsufficientHistory(
            f"need at least {model.p + model.d + 1} observations, have {history.size}"
        )
    z = _difference(history, model.d)
    p, q = model.p, model.q
    eps = np.concatenate((np.zeros(p), _css_residuals(z, model.c, model.phi, model.theta)))

    z_ext = list(z)
    eps_ext = list(eps)
    for _ in range(horizon):
        ar = sum(model.phi[i] * z_ext[-1 - i] for i in range(p))
        ma = sum(model.theta[j] * eps_ext[-1 - j] for j in range(q))
        z_ext.append(model.c + ar + ma)
        eps_ext.append(0.0)
    z_future = np.asarray(z_ext[z.size :])

    if model.d == 0:
        return z_future
    # one level of undifferencing per d, anchored at the tail of the history
    out = z_future
    for level in range(model.d):
        anchor = history[-1] if level == model.d - 1 else _difference(history, model.d - 1 - level)[-1]
        out = anchor + np.cumsum(out)
    return out


class ArimaForecaster(Forecaster):
    """Fits once on the training series and forecasts each window from its own
    168-hour history."""

    def __init__(self, orders=(1, 1, 1)):
        self.orders = tuple(orders)
        self.model: ArimaModel | None = None

    def fit(self, windows: SupervisedWindowSet) -> "ArimaForecaster":
        boundary = int(windows.start_indices.max()) + windows.lookback + windows.horizon
        self.model = fit_arima(windows.series.values[:boundary], self.orders)
        return self

    def predict_batch(self, windows: SupervisedWindowSet) -> np.ndarray:
        if self.model is None:
            raise EmptyInput("forecaster is not fitted")
        return np.stack(
            [arima_forecast(self.model, row, windows.horizon) for row in windows.raw_inputs]
        )
