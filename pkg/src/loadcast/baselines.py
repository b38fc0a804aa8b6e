"""Conventional tree-ensemble baselines: bagging, random forest, ExtraTrees
forest and AdaBoost.R2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidHyperparameter
from .seeding import rng_from
from .tree import (
    RegressionTree,
    TreeParams,
    fit_cart,
    fit_cart_subspaced,
    fit_extratree,
    tree_predict_many,
)

ADABOOST_BETA_FLOOR = 1e-10


@dataclass(frozen=True)
class Forest:
    """Ensemble of regression trees. Uniform kinds average member outputs;
    adaboost takes the weighted median."""

    trees: list
    tree_weights: np.ndarray
    kind: str  # bagging | random_forest | extratrees | adaboost
    n_features: int
    params: TreeParams = field(default=TreeParams(), repr=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def _member_matrix(forest: Forest, X) -> np.ndarray:
    """Per-tree predictions, shaped (n_samples, n_trees)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise DimensionMismatch(f"expected (n, {forest.n_features}) inputs, got {X.shape}")
    return np.column_stack([tree_predict_many(t, X) for t in forest.trees])


def _weighted_median(values, weights):
    order = np.argsort(values, kind="stable")
    cdf = np.cumsum(weights[order])
    k = np.searchsorted(cdf, 0.5 * cdf[-1])
    return values[order[min(k, values.size - 1)]]


def forest_predict_many(forest: Forest, X) -> np.ndarray:
    preds = _member_matrix(forest, X)
    if forest.kind == "adaboost":
        return np.array([_weighted_median(row, forest.tree_weights) for row in preds])
    return preds.mean(axis=1)


def forest_predict(forest: Forest, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (forest.n_features,):
        raise DimensionMismatch(f"expected {forest.n_features} features, got shape {x.shape}")
    return float(forest_predict_many(forest, x[None, :])[0])


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch(f"X {X.shape} does not pair with y {y.shape}")
    if X.shape[0] == 0:
        raise EmptyInput("need at least one sample")
    return X, y


def fit_bag(
    X,
    y,
    n_trees: int = 100,
    base: str = "cart",
    bootstrap: bool = True,
    params: TreeParams = TreeParams(),
    seed: int = 0,
    kind: str | None = None,
) -> Forest:
    """Bag of trees fitted on bootstrap resamples (or the full sample), each
    member using the substream derived from (seed, tree index)."""
    X, y = _check_xy(X, y)
    if n_trees < 1:
        raise InvalidHyperparameter("n_trees must be >= 1")
    if base not in ("cart", "extratree"):
        raise InvalidHyperparameter(f"unknown base learner {base!r}")
    n = y.size
    trees = []
    for i in range(n_trees):
        rng = rng_from(seed, "bag", i)
        idx = rng.choice(n, size=n, replace=True) if bootstrap else np.arange(n)
        if base == "cart":
            trees.append(fit_cart(X[idx], y[idx], params))
        else:
            trees.append(fit_extratree(X[idx], y[idx], params, seed=rng))
    return Forest(
        trees=trees,
        tree_weights=np.ones(n_trees),
        kind=kind or "bagging",
        n_features=X.shape[1],
        params=params,
    )


def fit_random_forest(
    X,
    y,
    n_trees: int = 100,
    max_features: int | None = None,
    params: TreeParams = TreeParams(),
    seed: int = 0,
    bootstrap: bool = True,
) -> Forest:
    """Bootstrap resamples plus per-node feature subsampling with exact best
    splits inside the subset."""
    X, y = _check_xy(X, y)
    if n_trees < 1:
        raise InvalidHyperparameter("n_trees must be >= 1")
    d = X.shape[1]
    m = max_features or d
    trees = []
    for i in range(n_trees):
        rng = rng_from(seed, "rf", i)
        idx = rng.choice(y.size, size=y.size, replace=True) if bootstrap else np.arange(y.size)
        trees.append(fit_cart_subspaced(X[idx], y[idx], params, m, rng))
    return Forest(
        trees=trees,
        tree_weights=np.ones(n_trees),
        kind="random_forest",
        n_features=d,
        params=params,
    )


def fit_adaboost_r2(
    X,
    y,
    n_trees: int = 100,
    params: TreeParams = TreeParams(),
    seed: int = 0,
) -> Forest:
    """AdaBoost.R2 with linear loss: weighted resampling per round, confidence
    log(1/beta), weighted-median prediction.

    A round with average loss >= 0.5 stops the loop (rounds so far are kept; the
    offending round is kept only when it would otherwise be the only one). A
    zero-loss round keeps its tree with beta floored at 1e-10 and stops.
    """
    X, y = _check_xy(X, y)
    if y.size < 2:
        raise EmptyInput("adaboost needs at least two samples")
    if n_trees < 1:
        raise InvalidHyperparameter("n_trees must be >= 1")
    n = y.size
    sample_w = np.full(n, 1.0 / n)
    trees: list[RegressionTree] = []
    stage_w: list[float] = []
    for m in range(n_trees):
        rng = rng_from(seed, "ada", m)
        idx = rng.choice(n, size=n, replace=True, p=sample_w)
        tree = fit_cart(X[idx], y[idx], params)
        err = np.abs(tree_predict_many(tree, X) - y)
        err_max = err.max()
        if err_max == 0.0:
            trees.append(tree)
            stage_w.append(np.log(1.0 / ADABOOST_BETA_FLOOR))
            break
        loss = err / err_max
        avg_loss = float(sample_w @ loss)
        if avg_loss >= 0.5:
            if not trees:  # keep a usable model instead of an empty forest
                trees.append(tree)
                stage_w.append(1.0)
            break
        beta = max(avg_loss / (1.0 - avg_loss), ADABOOST_BETA_FLOOR)
        trees.append(tree)
        stage_w.append(np.log(1.0 / beta))
        sample_w = sample_w * beta ** (1.0 - loss)
        sample_w = sample_w / sample_w.sum()
    return Forest(
        trees=trees,
        tree_weights=np.asarray(stage_w),
        kind="adaboost",
        n_features=X.shape[1],
        params=params,
    )
