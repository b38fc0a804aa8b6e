"""ElasticNet regression by cyclic coordinate descent, with exhaustive
(alpha, rho) grid search on a holdout set.

The objective, over standardized features with an unpenalized intercept, is

    (1 / 2N) * ||y - (Xw + b)||^2 + alpha*rho*||w||_1 + alpha*(1-rho)*||w||_2^2

One descent engine serves both the scalar fit and a multi-target variant that
updates every target column in lockstep (the per-hour ensembles share X, so
this removes a factor of the horizon from the sweep count).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    EmptyInput,
    InvalidHyperparameter,
    NonFiniteInput,
)

DEFAULT_ALPHAS = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_RHOS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # population std, zero-spread features pinned to 1

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


@dataclass(frozen=True)
class ElasticNetModel:
    w: np.ndarray
    intercept: float
    alpha: float
    rho: float
    standardizer: Standardizer
    n_sweeps: int = 0
    objective_history: np.ndarray | None = None
    fitted_values: np.ndarray | None = None


def elasticnet_objective(w, intercept, X_std, y, alpha, rho) -> float:
    """Objective value on an already-standardized design matrix."""
    resid = y - (X_std @ w + intercept)
    n = y.size
    return float(
        0.5 / n * (resid @ resid)
        + alpha * rho * np.abs(w).sum()
        + alpha * (1.0 - rho) * (w @ w)
    )


def _standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return Standardizer(mean=mean, scale=scale)


def _cd_sweeps(Xs, R, W, col_ms, l1, l2, max_iters, tol, on_sweep=None):
    """Cyclic coordinate descent over all columns of W simultaneously.

    Xs: (n, d) standardized features; R: (n, k) residuals, updated in place;
    W: (d, k) coefficients, updated in place. Returns the sweep count.
    """
    n, d = Xs.shape
    denom = col_ms + l2
    sweeps = 0
    for sweeps in range(1, max_iters + 1):
        max_delta = 0.0
        for j in range(d):
            if denom[j] == 0.0:
                continue
            old = W[j].copy()
            z = (Xs[:, j] @ R) / n + col_ms[j] * old
            new = np.sign(z) * np.maximum(np.abs(z) - l1, 0.0) / denom[j]
            delta = old - new
            if np.any(delta != 0.0):
                R += np.outer(Xs[:, j], delta)
                W[j] = new
                max_delta = max(max_delta, float(np.max(np.abs(delta))))
        if on_sweep is not None:
            on_sweep()
        if max_delta < tol:
            break
    return sweeps


def _validate(X, Y, alpha, rho):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not pair with targets {Y.shape}")
    if Y.shape[0] == 0:
        raise EmptyInput("need at least one sample")
    if not (np.isfinite(X).all() and np.isfinite(Y).all()):
        raise NonFiniteInput("inputs must be finite")
    if alpha < 0 or not 0.0 <= rho <= 1.0:
        raise InvalidHyperparameter(f"need alpha >= 0 and 0 <= rho <= 1, got {alpha}, {rho}")
    return X, Y


def fit_elasticnet(
    X,
    y,
    alpha: float,
    rho: float,
    max_iters: int = 2000,
    tol: float = 1e-8,
    record_objective: bool = False,
    w_init=None,
) -> ElasticNetModel:
    """Cyclic coordinate descent; stops when the largest coefficient update in
    a sweep drops below tol. The objective is non-increasing per sweep."""
    X, y = _validate(X, y, alpha, rho)
    std = _standardize(X)
    Xs = std.transform(X)
    intercept = float(y.mean())
    col_ms = (Xs * Xs).mean(axis=0)  # per-feature mean square (1 unless constant)

    W = np.zeros((X.shape[1], 1)) if w_init is None else np.asarray(w_init, dtype=float).reshape(-1, 1).copy()
    R = (y - intercept)[:, None] - Xs @ W
    history = [] if record_objective else None

    def on_sweep():
        history.append(elasticnet_objective(W[:, 0], intercept, Xs, y, alpha, rho))

    sweeps = _cd_sweeps(
        Xs, R, W, col_ms,
        l1=alpha * rho, l2=2.0 * alpha * (1.0 - rho),
        max_iters=max_iters, tol=tol,
        on_sweep=on_sweep if record_objective else None,
    )
    model = ElasticNetModel(
        w=W[:, 0].copy(),
        intercept=intercept,
        alpha=float(alpha),
        rho=float(rho),
        standardizer=std,
        n_sweeps=sweeps,
        objective_history=None if history is None else np.asarray(history),
    )
    return replace(model, fitted_values=elasticnet_predict(model, X))


def fit_elasticnet_multi(
    X,
    Y,
    alpha: float,
    rho: float,
    max_iters: int = 2000,
    tol: float = 1e-8,
    w_init=None,
) -> list[ElasticNetModel]:
    """One independent ElasticNet per target column, descended in lockstep."""
    X, Y = _validate(X, Y, alpha, rho)
    if Y.ndim != 2:
        raise DimensionMismatch("fit_elasticnet_multi expects (n, k) targets")
    std = _standardize(X)
    Xs = std.transform(X)
    intercepts = Y.mean(axis=0)
    col_ms = (Xs * Xs).mean(axis=0)
    W = np.zeros((X.shape[1], Y.shape[1])) if w_init is None else np.asarray(w_init, dtype=float).copy()
    R = (Y - intercepts) - Xs @ W
    sweeps = _cd_sweeps(
        Xs, R, W, col_ms,
        l1=alpha * rho, l2=2.0 * alpha * (1.0 - rho),
        max_iters=max_iters, tol=tol,
    )
    models = []
    for k in range(Y.shape[1]):
        model = ElasticNetModel(
            w=W[:, k].copy(),
            intercept=float(intercepts[k]),
            alpha=float(alpha),
            rho=float(rho),
            standardizer=std,
            n_sweeps=sweeps,
        )
        models.append(replace(model, fitted_values=elasticnet_predict(model, X)))
    return models


def elasticnet_predict(model: ElasticNetModel, X):
    """Standardize with the stored state and apply the affine map."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.shape[1] != model.w.size:
        raise DimensionMismatch(f"expected {model.w.size} features, got {X2.shape[1]}")
    out = model.standardizer.transform(X2) @ model.w + model.intercept
    return float(out[0]) if single else out


def kkt_residual(model: ElasticNetModel, X, y) -> float:
    """Largest violation of the subgradient optimality conditions."""
    Xs = model.standardizer.transform(X)
    y = np.asarray(y, dtype=float)
    n = y.size
    resid = y - (Xs @ model.w + model.intercept)
    grad = -(Xs.T @ resid) / n + 2.0 * model.alpha * (1.0 - model.rho) * model.w
    l1 = model.alpha * model.rho
    viol = np.where(
        model.w != 0.0,
        np.abs(grad + l1 * np.sign(model.w)),
        np.maximum(np.abs(grad) - l1, 0.0),
    )
    return float(viol.max()) if viol.size else 0.0


def _select_best(cells, mse_of):
    """Grid-search winner: lowest MSE, ties to larger alpha then larger rho."""
    best = None
    best_mse = np.inf
    for cell in cells:
        mse = mse_of(cell)
        if mse <= best_mse:  # cells arrive ordered so later (larger) wins ties
            best = cell
            best_mse = mse
    return best, best_mse


def grid_search_elasticnet(
    X_train,
    y_train,
    X_val,
    y_val,
    alphas=DEFAULT_ALPHAS,
    rhos=DEFAULT_RHOS,
    max_iters: int = 2000,
    tol: float = 1e-8,
):
    """Fit every (alpha, rho) cell and return (best model, validation-MSE grid).

    Within each rho the alphas are fitted largest first with warm starts, so
    the weakly regularized cells start near their solutions. Ties prefer the
    larger alpha, then the larger rho.
    """
    alphas = sorted(alphas)
    rhos = list(rhos)
    if not alphas or not rhos:
        raise EmptyGrid("alpha and rho grids must be non-empty")
    X_val = np.atleast_2d(np.asarray(X_val, dtype=float))
    y_val = np.asarray(y_val, dtype=float)
    mse_grid = np.empty((len(alphas), len(rhos)))
    models = {}
    for r_idx, rho in enumerate(rhos):
        w_prev = None
        for a_idx in range(len(alphas) - 1, -1, -1):
            model = fit_elasticnet(
                X_train, y_train, alphas[a_idx], rho, max_iters=max_iters, tol=tol, w_init=w_prev
            )
            w_prev = model.w
            mse_grid[a_idx, r_idx] = float(
                np.mean((elasticnet_predict(model, X_val) - y_val) ** 2)
            )
            models[a_idx, r_idx] = model
    cells = [(a_idx, r_idx) for a_idx in range(len(alphas)) for r_idx in range(len(rhos))]
    best_cell, _ = _select_best(cells, lambda c: mse_grid[c])
    return models[best_cell], mse_grid


def grid_search_elasticnet_multi(
    X_train,
    Y_train,
    X_val,
    Y_val,
    alphas=DEFAULT_ALPHAS,
    rhos=DEFAULT_RHOS,
    max_iters: int = 2000,
    tol: float = 1e-8,
):
    """Per-target grid search sharing the descent across target columns.

    Returns (list of best models, mse_grid of shape (n_alphas, n_rhos, k)).
    """
    alphas = sorted(alphas)
    rhos = list(rhos)
    if not alphas or not rhos:
        raise EmptyGrid("alpha and rho grids must be non-empty")
    Y_train = np.asarray(Y_train, dtype=float)
    Y_val = np.asarray(Y_val, dtype=float)
    k = Y_train.shape[1]
    mse_grid = np.empty((len(alphas), len(rhos), k))
    fitted = {}
    for r_idx, rho in enumerate(rhos):
        w_prev = None
        for a_idx in range(len(alphas) - 1, -1, -1):
            models = fit_elasticnet_multi(
                X_train, Y_train, alphas[a_idx], rho, max_iters=max_iters, tol=tol, w_init=w_prev
            )
            w_prev = np.column_stack([m.w for m in models])
            fitted[a_idx, r_idx] = models
            for col, model in enumerate(models):
                pred = elasticnet_predict(model, X_val)
                mse_grid[a_idx, r_idx, col] = float(np.mean((pred - Y_val[:, col]) ** 2))
    cells = [(a_idx, r_idx) for a_idx in range(len(alphas)) for r_idx in range(len(rhos))]
    best_models = []
    for col in range(k):
        best_cell, _ = _select_best(cells, lambda c: mse_grid[c[0], c[1], col])
        best_models.append(fitted[best_cell][col])
    return best_models, mse_grid
