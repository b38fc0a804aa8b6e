"""Staged additive boosting: stochastic gradient tree boosting over CART, and
its warm-start variant initialized by a grid-searched ElasticNet and driven by
bags of extremely randomized trees."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import Forest, forest_predict_many
from .errors import (
    DimensionMismatch,
    EmptyCurve,
    EmptyInput,
    InvalidHyperparameter,
    LengthMismatch,
)
from .linear import (
    DEFAULT_ALPHAS,
    DEFAULT_RHOS,
    ElasticNetModel,
    elasticnet_predict,
    grid_search_elasticnet,
)
from .seeding import rng_from
from .tree import RegressionTree, TreeParams, fit_cart, fit_extratree, tree_predict_many


@dataclass(frozen=True)
class EarlyStopping:
    patience: int = 10
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.patience < 1:
            raise InvalidHyperparameter("patience must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise InvalidHyperparameter("validation_fraction must be in (0, 1)")


@dataclass(frozen=True)
class BoostParams:
    shrinkage: float = 0.05
    n_stages: int = 70
    subsample_ratio: float = 0.8
    base_kind: str = "cart"  # cart | extratree_bag
    bag_size: int = 10
    tree_params: TreeParams = field(default_factory=TreeParams)
    seed: int = 0
    early_stopping: EarlyStopping | None = None

    def __post_init__(self):
        if not 0.0 < self.shrinkage <= 1.0:
            raise InvalidHyperparameter("shrinkage must be in (0, 1]")
        if not 0.0 < self.subsample_ratio <= 1.0:
            raise InvalidHyperparameter("subsample_ratio must be in (0, 1]")
        if self.n_stages < 0:
            raise InvalidHyperparameter("n_stages must be >= 0")
        if self.bag_size < 1:
            raise InvalidHyperparameter("bag_size must be >= 1")
        if self.base_kind not in ("cart", "extratree_bag"):
            raise InvalidHyperparameter(f"unknown base_kind {self.base_kind!r}")


@dataclass(frozen=True)
class BoostStage:
    gamma: float
    estimator: RegressionTree | Forest


@dataclass(frozen=True)
class BoostedModel:
    """Prediction = init(x) + shrinkage * sum_m gamma_m * h_m(x)."""

    init_kind: str  # constant | elasticnet
    init_value: float | None
    init_model: ElasticNetModel | None
    stages: list
    params: BoostParams
    train_curve: np.ndarray        # loss (MSE) after 0..M stages on the boost-train slice
    val_curve: np.ndarray | None   # same on the validation slice, when one exists

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def init_predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.init_kind == "constant":
            return np.full(X.shape[0], self.init_value)
        return elasticnet_predict(self.init_model, X)


def negative_gradient(y, predictions) -> np.ndarray:
    """Residuals y - F: the descent direction of L = (1/2)(y - F)^2."""
    y = np.asarray(y, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if y.shape != predictions.shape:
        raise LengthMismatch(f"targets {y.shape} vs predictions {predictions.shape}")
    return y - predictions


def line_search_gamma(y, predictions, h_values) -> float:
    """Closed-form stage weight for squared loss: sum(h*(y-F)) / sum(h^2).

    All-zero base predictions carry no information, so gamma = 0 and the
    stage contributes nothing.
    """
    y = np.asarray(y, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    h = np.asarray(h_values, dtype=float)
    if not (y.shape == predictions.shape == h.shape):
        raise LengthMismatch("y, predictions and h_values must share a shape")
    denom = float(h @ h)
    if denom == 0.0:
        return 0.0
    return float(h @ (y - predictions)) / denom


def early_stop_scan(validation_curve, patience: int) -> int:
    """Index of the curve minimum among stages visited before the patience
    monitor fires; ties resolve to the earliest stage."""
    curve = np.asarray(validation_curve, dtype=float)
    if curve.size == 0:
        raise EmptyCurve("validation curve is empty")
    if patience < 1:
        raise InvalidHyperparameter("patience must be >= 1")
    best = 0
    since_best = 0
    for i in range(1, curve.size):
        if curve[i] < curve[best]:
            best = i
            since_best = 0
        else:
            since_best += 1
            if since_best >= patience:
                break
    return best


def _fit_base(X_sub, r_sub, params: BoostParams, stage: int):
    if params.base_kind == "cart":
        return fit_cart(X_sub, r_sub, params.tree_params)
    trees = [
        fit_extratree(
            X_sub, r_sub, params.tree_params, seed=rng_from(params.seed, "stage", stage, "bag", b)
        )
        for b in range(params.bag_size)
    ]
    return Forest(
        trees=trees,
        tree_weights=np.ones(params.bag_size),
        kind="bagging",
        n_features=X_sub.shape[1],
        params=params.tree_params,
    )


def _base_predict(estimator, X):
    if isinstance(estimator, RegressionTree):
        return tree_predict_many(estimator, X)
    return forest_predict_many(estimator, X)


def _mse(y, F) -> float:
    return float(np.mean((y - F) ** 2))


def _run_stages(X, y, F, params: BoostParams, X_val=None, y_val=None, F_val=None):
    """Shared stage loop. Returns (stages, train_curve, val_curve), already
    truncated at the validation optimum when early stopping is configured."""
    n = y.size
    has_val = X_val is not None and y_val.size > 0
    stages = []
    train_curve = [_mse(y, F)]
    val_curve = [_mse(y_val, F_val)] if has_val else None
    monitor = params.early_stopping
    best_val = val_curve[0] if has_val else None
    since_best = 0
    for m in range(1, params.n_stages + 1):
        rng = rng_from(params.seed, "stage", m)
        n_sub = max(1, int(np.floor(params.subsample_ratio * n)))
        idx = np.arange(n) if n_sub == n else rng.choice(n, size=n_sub, replace=False)
        residual = negative_gradient(y[idx], F[idx])
        estimator = _fit_base(X[idx], residual, params, m)
        h_all = _base_predict(estimator, X)
        gamma = line_search_gamma(y[idx], F[idx], h_all[idx])
        stages.append(BoostStage(gamma=gamma, estimator=estimator))
        if gamma != 0.0:
            F = F + params.shrinkage * gamma * h_all
            if has_val:
                F_val = F_val + params.shrinkage * gamma * _base_predict(estimator, X_val)
        train_curve.append(_mse(y, F))
        if has_val:
            val_curve.append(_mse(y_val, F_val))
            if monitor is not None:
                if val_curve[-1] < best_val:
                    best_val = val_curve[-1]
                    since_best = 0
                else:
                    since_best += 1
                    if since_best >= monitor.patience:
                        break
    if monitor is not None and has_val:
        k = early_stop_scan(val_curve, monitor.patience)
        stages = stages[:k]
        train_curve = train_curve[: k + 1]
        val_curve = val_curve[: k + 1]
    return (
        stages,
        np.asarray(train_curve),
        None if val_curve is None else np.asarray(val_curve),
    )


def _chronological_tail_split(n: int, fraction: float):
    n_val = int(np.floor(fraction * n))
    n_val = max(1, n_val)
    if n - n_val < 1:
        raise EmptyInput(f"cannot carve a validation slice of {n_val} from {n} samples")
    return np.arange(n - n_val), np.arange(n - n_val, n)


def _check_boost_inputs(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch(f"X {X.shape} does not pair with y {y.shape}")
    if y.size == 0:
        raise EmptyInput("need at least one sample")
    return X, y


def fit_sgtb(X, y, params: BoostParams | None = None) -> BoostedModel:
    """Stochastic gradient tree boosting from a constant mean start.

    Per stage: subsample without replacement, fit CART to the residuals,
    line-search the stage weight on the subsample, apply the shrinkage update.
    """
    params = params or BoostParams(base_kind="cart")
    X, y = _check_boost_inputs(X, y)
    if params.early_stopping is not None:
        fit_idx, val_idx = _chronological_tail_split(y.size, params.early_stopping.validation_fraction)
        X_fit, y_fit = X[fit_idx], y[fit_idx]
        X_val, y_val = X[val_idx], y[val_idx]
    else:
        X_fit, y_fit = X, y
        X_val = y_val = None
    init_value = float(y_fit.mean())
    F = np.full(y_fit.size, init_value)
    F_val = np.full(y_val.size, init_value) if X_val is not None else None
    stages, train_curve, val_curve = _run_stages(X_fit, y_fit, F, params, X_val, y_val, F_val)
    return BoostedModel(
        init_kind="constant",
        init_value=init_value,
        init_model=None,
        stages=stages,
        params=params,
        train_curve=train_curve,
        val_curve=val_curve,
    )


def fit_wgtb(
    X,
    y,
    params: BoostParams | None = None,
    alphas=DEFAULT_ALPHAS,
    rhos=DEFAULT_RHOS,
    init_model: ElasticNetModel | None = None,
) -> BoostedModel:
    """Warm-start gradient tree boosting.

    A chronological tail slice is held out; the ElasticNet warm start is
    grid-searched against it, then boosting stages (bags of ExtraTrees by
    default) fit the residuals on the remaining rows. With early stopping
    configured, the model is truncated at the validation-optimal stage.

    Passing init_model skips the internal grid search; the caller is expected
    to have grid-searched it on the same chronological split.
    """
    params = params or BoostParams(base_kind="extratree_bag")
    X, y = _check_boost_inputs(X, y)
    if y.size < 2:
        raise EmptyInput("warm-start boosting needs at least two samples")
    fraction = (
        params.early_stopping.validation_fraction if params.early_stopping is not None else 0.1
    )
    fit_idx, val_idx = _chronological_tail_split(y.size, fraction)
    X_fit, y_fit = X[fit_idx], y[fit_idx]
    X_val, y_val = X[val_idx], y[val_idx]
    if init_model is None:
        init_model, _ = grid_search_elasticnet(X_fit, y_fit, X_val, y_val, alphas=alphas, rhos=rhos)
    F = elasticnet_predict(init_model, X_fit)
    F_val = elasticnet_predict(init_model, X_val)
    stages, train_curve, val_curve = _run_stages(X_fit, y_fit, F, params, X_val, y_val, F_val)
    return BoostedModel(
        init_kind="elasticnet",
        init_value=None,
        init_model=init_model,
        stages=stages,
        params=params,
        train_curve=train_curve,
        val_curve=val_curve,
    )


def staged_predictions(model: BoostedModel, X) -> np.ndarray:
    """Predictions after 0..n_stages stages, shaped (n_stages + 1, n_samples),
    accumulated once in training order."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("expected a 2-d input matrix")
    out = np.empty((len(model.stages) + 1, X.shape[0]))
    pred = model.init_predict(X)
    out[0] = pred
    for m, stage in enumerate(model.stages, start=1):
        if stage.gamma != 0.0:
            pred = pred + model.params.shrinkage * stage.gamma * _base_predict(stage.estimator, X)
        out[m] = pred
    return out


def predict_at_stage(model: BoostedModel, X, n_stages: int) -> np.ndarray:
    """Prediction truncated after the first n_stages stages, accumulated in
    training order so it reproduces the fit-time arithmetic exactly."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("expected a 2-d input matrix")
    pred = model.init_predict(X)
    for stage in model.stages[:n_stages]:
        if stage.gamma != 0.0:
            pred = pred + model.params.shrinkage * stage.gamma * _base_predict(stage.estimator, X)
    return pred


def boosted_predict(model: BoostedModel, X):
    """Full staged-additive prediction; accepts one row or a matrix."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    out = predict_at_stage(model, X[None, :] if single else X, len(model.stages))
    return float(out[0]) if single else out
