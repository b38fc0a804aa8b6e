"""Forecast metrics, a synthetic load generator with a known mean function,
and Monte-Carlo bias-variance estimation."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .data import HOURS_PER_DAY, HourlyLoadSeries
from .errors import EmptyInput, FactoryFailure, InvalidHyperparameter, ShapeMismatch, ZeroTruth
from .seeding import rng_from
from .tree import TreeParams, fit_cart, fit_extratree, tree_predict_many

SYNTHETIC_START = datetime(2017, 1, 2)  # a Monday, so weekday 0 aligns with day 0


# --- metrics ------------------------------------------------------------

def _check_pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 2 or y_true.shape != y_pred.shape:
        raise ShapeMismatch(f"expected matching (N, T) arrays, got {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise EmptyInput("metrics need at least one sample")
    return y_true, y_pred


def mape(y_true, y_pred) -> float:
    """Mean absolute percent error: per-hour relative errors averaged within a
    sample, then across samples, times 100."""
    y_true, y_pred = _check_pair(y_true, y_pred)
    if np.any(y_true == 0.0):
        raise ZeroTruth("MAPE is undefined when a true value is zero")
    return float(np.mean(np.mean(np.abs((y_true - y_pred) / y_true), axis=1)) * 100.0)


def mae(y_true, y_pred) -> float:
    y_true, y_pred = _check_pair(y_true, y_pred)
    return float(np.mean(np.mean(np.abs(y_true - y_pred), axis=1)))


def rmse(y_true, y_pred) -> float:
    """Root errors are taken per sample and then averaged, so this is the mean
    of per-sample RMSEs, not the root of the pooled MSE."""
    y_true, y_pred = _check_pair(y_true, y_pred)
    return float(np.mean(np.sqrt(np.mean((y_true - y_pred) ** 2, axis=1))))


@dataclass(frozen=True)
class MetricsReport:
    mape: float
    mae: float
    rmse: float
    n_samples: int
    horizon: int


def compute_metrics(y_true, y_pred) -> MetricsReport:
    y_true, y_pred = _check_pair(y_true, y_pred)
    return MetricsReport(
        mape=mape(y_true, y_pred),
        mae=mae(y_true, y_pred),
        rmse=rmse(y_true, y_pred),
        n_samples=y_true.shape[0],
        horizon=y_true.shape[1],
    )


# --- synthetic generator ------------------------------------------------

@dataclass(frozen=True)
class SyntheticLoadSpec:
    """Daily/weekly sinusoids plus holiday dips around a base level, with
    Gaussian noise. The noiseless mean function is exposed exactly."""

    base_level: float = 100.0
    daily_amplitude: float = 25.0
    weekly_amplitude: float = 10.0
    holiday_dip: float = 15.0
    noise_sigma: float = 2.0
    days: int = 365
    seed: int = 0
    holiday_days: tuple = ()

    def __post_init__(self):
        if self.daily_amplitude < 0 or self.weekly_amplitude < 0 or self.holiday_dip < 0:
            raise InvalidHyperparameter("amplitudes must be >= 0")
        if self.noise_sigma < 0:
            raise InvalidHyperparameter("noise_sigma must be >= 0")
        if self.days < 1:
            raise InvalidHyperparameter("days must be >= 1")

    @property
    def n_hours(self) -> int:
        return self.days * HOURS_PER_DAY

    def holiday_flags(self) -> np.ndarray:
        flags = np.zeros(self.days, dtype=bool)
        for d in self.holiday_days:
            if 0 <= d < self.days:
                flags[d] = True
        return flags

    def mean_value(self, hour_index) -> np.ndarray:
        """Noiseless load at each hour index since the series start."""
        t = np.asarray(hour_index)
        hour = t % HOURS_PER_DAY
        day = t // HOURS_PER_DAY
        value = (
            self.base_level
            + self.daily_amplitude * np.sin(2.0 * np.pi * hour / HOURS_PER_DAY)
            + self.weekly_amplitude * np.sin(2.0 * np.pi * day / 7.0)
        )
        if self.holiday_days:
            flags = self.holiday_flags()
            value = value - self.holiday_dip * flags[np.minimum(day, self.days - 1)]
        return value

    def feature_matrix(self, hour_index) -> np.ndarray:
        """(hour of day, weekday, holiday flag) rows; the mean function is an
        exact function of these, so they define the regression problem used by
        the bias-variance laboratory."""
        t = np.asarray(hour_index)
        day = t // HOURS_PER_DAY
        flags = self.holiday_flags()
        holiday = flags[np.minimum(day, self.days - 1)].astype(float)
        return np.column_stack([t % HOURS_PER_DAY, day % 7, holiday]).astype(float)


def generate_synthetic(spec: SyntheticLoadSpec):
    """Sample the generator once; returns (series, mean accessor)."""
    t = np.arange(spec.n_hours)
    mean = spec.mean_value(t)
    noise = rng_from(spec.seed, "synthetic").normal(0.0, spec.noise_sigma, size=spec.n_hours)
    values = np.maximum(mean + noise, 1e-9)  # loads must stay positive
    series = HourlyLoadSeries(
        start=SYNTHETIC_START, values=values, holiday_flags=spec.holiday_flags()
    )
    return series, spec.mean_value


# --- bias-variance laboratory -------------------------------------------

@dataclass(frozen=True)
class BiasVarianceReport:
    sigma2: float          # irreducible noise variance (known from the spec)
    bias_sq: float         # squared gap between mean model and mean function
    variance: float        # spread of the model around its own mean
    total_error: float     # fresh-noise test error
    decomposition_gap: float
    gap_se: float          # Monte-Carlo standard error of the gap
    n_resamples: int
    bag_size: int = 1


def default_eval_hours(spec: SyntheticLoadSpec, n_points: int = 64) -> np.ndarray:
    return np.unique(np.linspace(0, spec.n_hours - 1, n_points).astype(int))


def cart_factory(params: TreeParams = TreeParams(max_depth=6)):
    def factory(X, y, rng):
        tree = fit_cart(X, y, params)
        return lambda Xq: tree_predict_many(tree, Xq)

    return factory


def extratree_factory(params: TreeParams = TreeParams(max_depth=6)):
    def factory(X, y, rng):
        tree = fit_extratree(X, y, params, seed=rng)
        return lambda Xq: tree_predict_many(tree, Xq)

    return factory


def extratree_bag_factory(bag_size: int, params: TreeParams = TreeParams(max_depth=6)):
    def factory(X, y, rng):
        trees = [fit_extratree(X, y, params, seed=rng) for _ in range(bag_size)]
        return lambda Xq: np.mean([tree_predict_many(t, Xq) for t in trees], axis=0)

    return factory


def constant_factory(value: float):
    def factory(X, y, rng):
        return lambda Xq: np.full(Xq.shape[0], value)

    return factory


def oracle_factory(spec: SyntheticLoadSpec):
    """Returns the generator's own mean function: zero bias, zero variance."""

    def factory(X, y, rng):
        def predict(Xq):
            hour = Xq[:, 0]
            weekday = Xq[:, 1]
            holiday = Xq[:, 2]
            return (
                spec.base_level
                + spec.daily_amplitude * np.sin(2.0 * np.pi * hour / HOURS_PER_DAY)
                + spec.weekly_amplitude * np.sin(2.0 * np.pi * weekday / 7.0)
                - spec.holiday_dip * holiday
            )

        return predict

    return factory


def bias_variance_estimate(
    model_factory,
    spec: SyntheticLoadSpec,
    n_resamples: int,
    eval_hours=None,
    seed: int = 0,
) -> BiasVarianceReport:
    """Fit the factory on fresh-noise resamples of the generator and decompose
    the fresh-noise test error at the evaluation points.

    The model mean is the empirical mean over resamples, which makes
    bias^2 + variance equal the mean squared gap to the mean function exactly;
    the reported gap is the purely stochastic remainder, with its Monte-Carlo
    standard error estimated from the per-resample values.
    """
    if n_resamples < 2:
        raise InvalidHyperparameter("need at least two resamples")
    if eval_hours is None:
        eval_hours = default_eval_hours(spec)
    t_grid = np.arange(spec.n_hours)
    X_grid = spec.feature_matrix(t_grid)
    f_grid = spec.mean_value(t_grid)
    X_eval = spec.feature_matrix(eval_hours)
    f_eval = spec.mean_value(eval_hours)

    preds = np.empty((n_resamples, X_eval.shape[0]))
    totals = np.empty(n_resamples)
    for k in range(n_resamples):
        rng = rng_from(seed, "resample", k)
        y_k = f_grid + rng.normal(0.0, spec.noise_sigma, size=f_grid.size)
        try:
            model = model_factory(X_grid, y_k, rng_from(seed, "model", k))
            preds[k] = model(X_eval)
        except Exception as exc:  # noqa: BLE001 - reported with resample index
            raise FactoryFailure(k, exc) from exc
        test_rng = rng_from(seed, "testnoise", k)
        y_test = f_eval + test_rng.normal(0.0, spec.noise_sigma, size=f_eval.size)
        totals[k] = np.mean((y_test - preds[k]) ** 2)

    f_bar = preds.mean(axis=0)
    variance = float(np.mean((preds - f_bar) ** 2))
    bias_sq = float(np.mean((f_eval - f_bar) ** 2))
    sigma2 = float(spec.noise_sigma**2)
    total = float(totals.mean())
    per_k_gap = totals - sigma2 - np.mean((f_eval - preds) ** 2, axis=1)
    gap = float(per_k_gap.mean())
    gap_se = float(per_k_gap.std(ddof=1) / np.sqrt(n_resamples))
    return BiasVarianceReport(
        sigma2=sigma2,
        bias_sq=bias_sq,
        variance=variance,
        total_error=total,
        decomposition_gap=gap,
        gap_se=gap_se,
        n_resamples=n_resamples,
    )


def ablation_benchmark(seed, n_train=400, n_test=150, noise_sigma=1.8, outlier_scale=25.0,
                       mask=0.6, band_amplitude=1.6, band_freq=0.35, val_fraction=0.1,
                       n_decoys=3):
    """Stacking-shaped regression fixture for the boosting-base ablation.

    Noisy views of a smooth latent signal predict a target carrying a banded
    nonlinear term. A handful of large spikes sit inside opposite-sign bands
    of the fit rows, so they both bait exact-split trees and mask the band
    structure until absorbed; the appended test block is clean. Deterministic
    exact splits chase the spikes hard, randomized averaged trees dilute them,
    which is the variance contrast the curves are meant to expose.

    Returns (X_train, y_train, X_test, y_test).
    """
    rng = rng_from(seed, "ablation-benchmark")
    n = n_train + n_test
    t = np.arange(n)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    latent = (
        8.0 * np.sin(2.0 * np.pi * t / 24.0 + phases[0])
        + 5.0 * np.sin(2.0 * np.pi * t / 56.0 + phases[1])
        + 3.0 * np.sin(2.0 * np.pi * t / 7.0 + phases[2])
    )
    band = np.sign(np.sin(band_freq * latent))
    eps = noise_sigma * rng.normal(size=n)
    n_fit = n_train - int(np.floor(val_fraction * n_train))
    for sign in (-1.0, 1.0):
        rows = np.flatnonzero(band[:n_fit] == sign)
        n_out = max(1, int(round(mask * band_amplitude * rows.size / outlier_scale)))
        chosen = rng.choice(rows, size=min(n_out, rows.size), replace=False)
        eps[chosen] += -sign * outlier_scale
    y = latent + band_amplitude * band + eps
    columns = [
        latent + 0.25 * rng.normal(size=n),
        latent + 0.8 * rng.normal(size=n),
        latent + 1.5 * rng.normal(size=n),
    ]
    X = np.column_stack(columns + [rng.normal(size=(n, n_decoys))])
    return X[:n_train], y[:n_train], X[n_train:], y[n_train:]


@dataclass(frozen=True)
class BagVarianceRow:
    bag_size: int
    total_variance: float
    data_term: float        # Var over datasets of the seed-mean prediction
    seed_term: float        # mean over datasets of the within-dataset variance
    dataset_means: np.ndarray   # (n_datasets, n_eval) seed-mean predictions
    dataset_seed_vars: np.ndarray  # (n_datasets,) point-averaged seed variance


def bag_variance_sweep(
    spec: SyntheticLoadSpec,
    bag_sizes=(1, 10, 50),
    n_datasets: int = 16,
    n_seeds: int = 16,
    tree_params: TreeParams = TreeParams(max_depth=6),
    eval_hours=None,
    seed: int = 0,
) -> list[BagVarianceRow]:
    """Nested Monte Carlo over data draws (outer) and tree seeds (inner) for
    bags of extremely randomized trees of each size."""
    if min(bag_sizes) < 1:
        raise InvalidHyperparameter("bag sizes must be >= 1")
    if eval_hours is None:
        eval_hours = default_eval_hours(spec)
    t_grid = np.arange(spec.n_hours)
    X_grid = spec.feature_matrix(t_grid)
    f_grid = spec.mean_value(t_grid)
    X_eval = spec.feature_matrix(eval_hours)

    datasets = []
    for j in range(n_datasets):
        rng = rng_from(seed, "sweep-data", j)
        datasets.append(f_grid + rng.normal(0.0, spec.noise_sigma, size=f_grid.size))

    rows = []
    for M in bag_sizes:
        means = np.empty((n_datasets, X_eval.shape[0]))
        seed_vars = np.empty(n_datasets)
        all_preds = np.empty((n_datasets, n_seeds, X_eval.shape[0]))
        for j, y_j in enumerate(datasets):
            for s in range(n_seeds):
                rng = rng_from(seed, "sweep-bag", M, j, s)
                member = np.empty((M, X_eval.shape[0]))
                for b in range(M):
                    tree = fit_extratree(X_grid, y_j, tree_params, seed=rng)
                    member[b] = tree_predict_many(tree, X_eval)
                all_preds[j, s] = member.mean(axis=0)
            means[j] = all_preds[j].mean(axis=0)
            seed_vars[j] = float(np.mean(all_preds[j].var(axis=0, ddof=1)))
        total = float(np.mean(all_preds.reshape(-1, X_eval.shape[0]).var(axis=0, ddof=1)))
        data_term = float(np.mean(means.var(axis=0, ddof=1)))
        seed_term = float(seed_vars.mean())
        rows.append(
            BagVarianceRow(
                bag_size=M,
                total_variance=total,
                data_term=data_term,
                seed_term=seed_term,
                dataset_means=means,
                dataset_seed_vars=seed_vars,
            )
        )
    return rows
