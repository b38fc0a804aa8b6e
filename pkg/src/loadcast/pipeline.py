"""End-to-end experiment orchestration: preprocess, fit the four submodels,
stack their outputs, fit the ensembles, evaluate, and write reports.

Every artifact written here is a pure function of (config, seed): components
draw from named substreams and all containers iterate in fixed order.
"""

from __future__ import annotations

import csv
import os
from dataclasses import replace

import numpy as np

from .baselines import fit_adaboost_r2, fit_bag, fit_random_forest
from .boosting import BoostParams, EarlyStopping, fit_sgtb, fit_wgtb
from .config import as_tuple, require
from .data import load_csv, make_windows, read_holiday_file, split_train_test
from .errors import MissingConfigKey
from .evaluation import (
    SyntheticLoadSpec,
    bag_variance_sweep,
    bias_variance_estimate,
    cart_factory,
    compute_metrics,
    generate_synthetic,
)
from .linear import grid_search_elasticnet_multi
from .persist import save_model
from .seeding import rng_from
from .stacking import (
    SUBMODEL_ORDER,
    HybridBundle,
    PerHourModel,
    StackingSet,
    build_stacking_set,
    fit_per_hour,
)
from .submodels import ArimaForecaster, ElmForecaster, LstmConfig, LstmForecaster, NusvrForecaster
from .submodels.base import forecaster_predict
from .tree import TreeParams

ROW_LABELS = {
    "arima": "ARIMA",
    "nusvr": "NuSVR",
    "elm": "ELM",
    "lstm": "LSTM",
    "elasticnet": "ElasticNet",
    "sgtb": "SGTB",
    "wgtb": "WGTB",
    "bagging": "Bagging",
    "extratree": "ExtraTree",
    "random_forest": "RandomForest",
    "adaboost": "Adaboost",
}
ROW_ORDER = tuple(ROW_LABELS)

LSTM_ABLATION_CONFIGS = (
    ("None", False, False, False),
    ("Holiday", False, True, False),
    ("Holiday, Hour", False, True, True),
    ("Weekday, Hour", True, False, True),
    ("Holiday, Weekday, Hour", True, True, True),
    ("Holiday, Weekday", True, True, False),
)


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def synthetic_spec_from_config(config: dict, seed: int) -> SyntheticLoadSpec:
    days = config["synthetic.days"]
    every = config["synthetic.holiday_every"]
    holidays = tuple(range(every - 1, days, every)) if every else ()
    return SyntheticLoadSpec(
        base_level=config["synthetic.base_level"],
        daily_amplitude=config["synthetic.daily_amplitude"],
        weekly_amplitude=config["synthetic.weekly_amplitude"],
        holiday_dip=config["synthetic.holiday_dip"],
        noise_sigma=config["synthetic.noise_sigma"],
        days=days,
        seed=seed,
        holiday_days=holidays,
    )


def series_from_config(config: dict, seed: int):
    source = require(config, "data.source")
    if source == "synthetic":
        series, _ = generate_synthetic(synthetic_spec_from_config(config, seed))
        return series
    if source == "csv":
        path = require(config, "data.csv_path")
        holidays_path = config["data.holidays_path"]
        calendar = read_holiday_file(holidays_path) if holidays_path else frozenset()
        return load_csv(path, calendar)
    raise MissingConfigKey(f"data.source must be 'synthetic' or 'csv', got {source!r}")


def _derived_seed(seed: int, *key) -> int:
    return int(rng_from(seed, *key).integers(0, 2**31 - 1))


def lstm_config_from(config: dict, seed: int, include_weekday=None, include_holiday=None,
                     include_hour=None) -> LstmConfig:
    paper_scale = config["lstm.paper_scale"]
    return LstmConfig(
        n_layers=config["lstm.n_layers"],
        hidden_size=128 if paper_scale else config["lstm.hidden_size"],
        fc_size=128 if paper_scale else config["lstm.fc_size"],
        epochs=(100, 130) if paper_scale else (config["lstm.epochs_phase1"], config["lstm.epochs_phase2"]),
        learning_rates=(config["lstm.lr_phase1"], config["lstm.lr_phase2"]),
        batch_size=config["lstm.batch_size"],
        seed=seed,
        include_weekday=config["lstm.include_weekday"] if include_weekday is None else include_weekday,
        include_holiday=config["lstm.include_holiday"] if include_holiday is None else include_holiday,
        include_hour=config["lstm.include_hour"] if include_hour is None else include_hour,
    )


def fit_submodels(config: dict, seed: int, train_windows) -> dict:
    submodels = {
        "arima": ArimaForecaster(orders=(config["arima.p"], config["arima.d"], config["arima.q"])),
        "nusvr": NusvrForecaster(
            nu=config["nusvr.nu"],
            C_grid=as_tuple(config["nusvr.c_grid"]),
            tol=config["nusvr.tol"],
            max_iter=config["nusvr.max_iter"],
        ),
        "elm": ElmForecaster(
            hidden_size=config["elm.hidden_size"],
            ridge=config["elm.ridge"],
            seed=_derived_seed(seed, "submodel", "elm"),
            include_holiday=config["elm.include_holiday"],
            include_weekday=config["elm.include_weekday"],
        ),
        "lstm": LstmForecaster(lstm_config_from(config, _derived_seed(seed, "submodel", "lstm"))),
    }
    for name in SUBMODEL_ORDER:
        submodels[name].fit(train_windows)
    return submodels


def _tree_params(max_depth: int) -> TreeParams:
    return TreeParams(max_depth=None if max_depth == 0 else max_depth)


def fit_ensembles(config: dict, seed: int, stack: StackingSet, included) -> dict:
    """Per-hour second-level models on the stacked submodel outputs.

    The ElasticNet row and the WGTB warm starts are the same grid-searched
    models (fitted once, in lockstep across hours) since both validate on the
    same chronological tail slice.
    """
    X = stack.train_inputs
    Y = stack.train_targets
    d = X.shape[1]
    ensembles = {}

    warm_starts = None
    if "elasticnet" in included or "wgtb" in included:
        frac = config["ensemble.elasticnet.validation_fraction"]
        n_val = max(1, int(np.floor(frac * X.shape[0])))
        split = X.shape[0] - n_val
        warm_starts, _ = grid_search_elasticnet_multi(
            X[:split], Y[:split], X[split:], Y[split:],
            alphas=as_tuple(config["ensemble.elasticnet.alphas"]),
            rhos=as_tuple(config["ensemble.elasticnet.rhos"]),
            max_iters=config["ensemble.elasticnet.max_iters"],
            tol=config["ensemble.elasticnet.tol"],
        )

    if "elasticnet" in included:
        ensembles["elasticnet"] = PerHourModel(kind="elasticnet", models=list(warm_starts))

    if "sgtb" in included:
        patience = config["ensemble.sgtb.early_stop_patience"]

        def fit_s(Xa, ya, hour):
            params = BoostParams(
                shrinkage=config["ensemble.sgtb.shrinkage"],
                n_stages=config["ensemble.sgtb.n_stages"],
                subsample_ratio=config["ensemble.sgtb.subsample_ratio"],
                base_kind="cart",
                tree_params=_tree_params(config["ensemble.sgtb.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "sgtb", hour),
                early_stopping=EarlyStopping(patience=patience) if patience else None,
            )
            return fit_sgtb(Xa, ya, params)

        ensembles["sgtb"] = fit_per_hour("sgtb", fit_s, X, Y)

    if "wgtb" in included:
        patience = config["ensemble.wgtb.early_stop_patience"]
        # share the grid-search holdout fraction so the warm start and the
        # early-stopping slice agree
        frac = config["ensemble.elasticnet.validation_fraction"]

        def fit_w(Xa, ya, hour):
            params = BoostParams(
                shrinkage=config["ensemble.wgtb.shrinkage"],
                n_stages=config["ensemble.wgtb.n_stages"],
                subsample_ratio=config["ensemble.wgtb.subsample_ratio"],
                base_kind="extratree_bag",
                bag_size=config["ensemble.wgtb.bag_size"],
                tree_params=_tree_params(config["ensemble.wgtb.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "wgtb", hour),
                early_stopping=EarlyStopping(patience=patience, validation_fraction=frac)
                if patience
                else None,
            )
            return fit_wgtb(Xa, ya, params, init_model=warm_starts[hour])

        ensembles["wgtb"] = fit_per_hour("wgtb", fit_w, X, Y)

    if "bagging" in included:

        def fit_b(Xa, ya, hour):
            return fit_bag(
                Xa, ya,
                n_trees=config["ensemble.bagging.n_trees"],
                base="cart",
                bootstrap=True,
                params=_tree_params(config["ensemble.bagging.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "bagging", hour),
            )

        ensembles["bagging"] = fit_per_hour("bagging", fit_b, X, Y)

    if "extratree" in included:

        def fit_x(Xa, ya, hour):
            return fit_bag(
                Xa, ya,
                n_trees=config["ensemble.extratree.n_trees"],
                base="extratree",
                bootstrap=False,
                params=_tree_params(config["ensemble.extratree.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "extratree", hour),
                kind="extratrees",
            )

        ensembles["extratree"] = fit_per_hour("extratree", fit_x, X, Y)

    if "random_forest" in included:

        def fit_r(Xa, ya, hour):
            return fit_random_forest(
                Xa, ya,
                n_trees=config["ensemble.random_forest.n_trees"],
                max_features=min(config["ensemble.random_forest.max_features"], d),
                params=_tree_params(config["ensemble.random_forest.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "random_forest", hour),
            )

        ensembles["random_forest"] = fit_per_hour("random_forest", fit_r, X, Y)

    if "adaboost" in included:

        def fit_a(Xa, ya, hour):
            return fit_adaboost_r2(
                Xa, ya,
                n_trees=config["ensemble.adaboost.n_trees"],
                params=_tree_params(config["ensemble.adaboost.max_depth"]),
                seed=_derived_seed(seed, "ensemble", "adaboost", hour),
            )

        ensembles["adaboost"] = fit_per_hour("adaboost", fit_a, X, Y)

    return ensembles


def run_experiment(config: dict, out_dir: str, seed: int | None = None) -> dict:
    """The full pipeline; returns the in-memory artifacts and writes reports,
    predictions, and serialized models under out_dir."""
    seed = config["seed"] if seed is None else seed
    included = tuple(config["models.include"])
    series = series_from_config(config, seed)
    windows = make_windows(
        series, config["data.lookback"], config["data.horizon"], config["data.stride"]
    )
    train_windows, test_windows = split_train_test(windows, config["data.train_days"])

    sub_included = [n for n in SUBMODEL_ORDER if n in included]
    submodels = fit_submodels(config, seed, train_windows)
    stack = build_stacking_set(submodels, train_windows, test_windows)
    ensembles = fit_ensembles(config, seed, stack, included)

    predictions = {}
    for name in sub_included:
        predictions[name] = {
            "train": stack.block(name, "train"),
            "test": stack.block(name, "test"),
        }
    for name, model in ensembles.items():
        predictions[name] = {
            "train": model.predict(stack.train_inputs),
            "test": model.predict(stack.test_inputs),
        }

    report_rows = []
    for name in ROW_ORDER:
        if name not in predictions:
            continue
        train_m = compute_metrics(stack.train_targets, predictions[name]["train"])
        test_m = compute_metrics(stack.test_targets, predictions[name]["test"])
        report_rows.append(
            [
                ROW_LABELS[name],
                _fmt(train_m.mape), _fmt(train_m.mae), _fmt(train_m.rmse),
                _fmt(test_m.mape), _fmt(test_m.mae), _fmt(test_m.rmse),
            ]
        )

    os.makedirs(out_dir, exist_ok=True)
    write_csv(
        os.path.join(out_dir, "report.csv"),
        ["algorithm", "train_mape", "train_mae", "train_rmse", "test_mape", "test_mae", "test_rmse"],
        report_rows,
    )

    train_stamps = [t.isoformat() for t in train_windows.target_start_timestamps()]
    test_stamps = [t.isoformat() for t in test_windows.target_start_timestamps()]
    horizon = train_windows.horizon
    pred_header = ["target_start"] + [f"h{h:02d}" for h in range(horizon)]
    for name in predictions:
        for split, stamps in (("train", train_stamps), ("test", test_stamps)):
            rows = [
                [stamp] + [_fmt(v) for v in row]
                for stamp, row in zip(stamps, predictions[name][split])
            ]
            write_csv(os.path.join(out_dir, "predictions", f"{name}_{split}.csv"), pred_header, rows)

    models_dir = os.path.join(out_dir, "models")
    os.makedirs(models_dir, exist_ok=True)
    for name in sub_included:
        save_model(submodels[name], os.path.join(models_dir, f"{name}.json"))
    for name, model in ensembles.items():
        save_model(model, os.path.join(models_dir, f"{name}.json"))
    bundle = None
    if "wgtb" in ensembles and len(sub_included) == len(SUBMODEL_ORDER):
        bundle = HybridBundle(
            submodels=submodels,
            ensemble=ensembles["wgtb"],
            normalizer=train_windows.normalizer,
            lookback=train_windows.lookback,
            horizon=train_windows.horizon,
            stride=config["data.stride"],
        )
        save_model(bundle, os.path.join(models_dir, "hybrid.json"))

    return {
        "series": series,
        "train_windows": train_windows,
        "test_windows": test_windows,
        "submodels": submodels,
        "stack": stack,
        "ensembles": ensembles,
        "predictions": predictions,
        "report_rows": report_rows,
        "bundle": bundle,
    }


def ablate_lstm_inputs(config: dict, out_dir: str, seed: int | None = None) -> list:
    """Train the LSTM under the six calendar-input configurations and emit the
    6x6 metric grid."""
    seed = config["seed"] if seed is None else seed
    series = series_from_config(config, seed)
    windows = make_windows(
        series, config["data.lookback"], config["data.horizon"], config["data.stride"]
    )
    train_windows, test_windows = split_train_test(windows, config["data.train_days"])
    rows = []
    for label, weekday, holiday, hour in LSTM_ABLATION_CONFIGS:
        lstm = LstmForecaster(
            lstm_config_from(
                config,
                _derived_seed(seed, "ablate", label),
                include_weekday=weekday,
                include_holiday=holiday,
                include_hour=hour,
            )
        )
        lstm.fit(train_windows)
        train_m = compute_metrics(train_windows.targets, forecaster_predict(lstm, train_windows))
        test_m = compute_metrics(test_windows.targets, forecaster_predict(lstm, test_windows))
        rows.append(
            [
                label,
                _fmt(train_m.mape), _fmt(train_m.mae), _fmt(train_m.rmse),
                _fmt(test_m.mape), _fmt(test_m.mae), _fmt(test_m.rmse),
            ]
        )
    write_csv(
        os.path.join(out_dir, "lstm_input_ablation.csv"),
        ["one_hot_inputs", "train_mape", "train_mae", "train_rmse", "test_mape", "test_mae", "test_rmse"],
        rows,
    )
    return rows


def ablation_curves(config: dict, seed: int):
    """CART-based versus ExtraTree-based warm-start boosting on the stacked
    benchmark; per-stage train curves and held-out-block error curves,
    averaged elementwise over the configured seeds."""
    from .boosting import staged_predictions
    from .evaluation import ablation_benchmark

    n_stages = config["bias_variance.ablation_stages"]
    n_seeds = config["bias_variance.ablation_seeds"]
    curves = {"cart_train": [], "cart_val": [], "extra_train": [], "extra_val": []}
    for s in range(n_seeds):
        X, y, X_test, y_test = ablation_benchmark(_derived_seed(seed, "ablation-data", s))
        for base, prefix in (("cart", "cart"), ("extratree_bag", "extra")):
            params = BoostParams(
                shrinkage=config["bias_variance.ablation_shrinkage"],
                n_stages=n_stages,
                subsample_ratio=0.8,
                base_kind=base,
                bag_size=10,
                tree_params=_tree_params(config["bias_variance.ablation_depth"]),
                seed=_derived_seed(seed, "ablation", base, s),
                early_stopping=None,
            )
            model = fit_wgtb(X, y, params, alphas=(0.01, 1.0), rhos=(0.5,))
            held_out = np.mean(
                (staged_predictions(model, X_test) - y_test) ** 2, axis=1
            )
            curves[f"{prefix}_train"].append(model.train_curve)
            curves[f"{prefix}_val"].append(held_out)
    return {k: np.mean(np.stack(v), axis=0) for k, v in curves.items()}


def bias_variance_lab(config: dict, out_dir: str, seed: int | None = None) -> dict:
    """The decomposition report, the bag-size variance sweep, and the
    CART-vs-ExtraTree boosting ablation curves."""
    seed = config["seed"] if seed is None else seed
    spec = replace(synthetic_spec_from_config(config, seed), days=28, holiday_days=(6, 20))
    depth = config["bias_variance.tree_depth"]
    tree_params = TreeParams(max_depth=depth)

    report = bias_variance_estimate(
        cart_factory(tree_params), spec, n_resamples=config["bias_variance.resamples"], seed=seed
    )
    write_csv(
        os.path.join(out_dir, "bias_variance_decomposition.csv"),
        ["component", "value", "mc_se"],
        [
            ["irreducible", _fmt(report.sigma2), _fmt(0.0)],
            ["bias_sq", _fmt(report.bias_sq), ""],
            ["variance", _fmt(report.variance), ""],
            ["total_error", _fmt(report.total_error), ""],
            ["decomposition_gap", _fmt(report.decomposition_gap), _fmt(report.gap_se)],
        ],
    )

    sweep = bag_variance_sweep(
        spec,
        bag_sizes=as_tuple(config["bias_variance.bag_sizes"]),
        n_datasets=config["bias_variance.datasets"],
        n_seeds=config["bias_variance.seeds_per_dataset"],
        tree_params=tree_params,
        seed=seed,
    )
    write_csv(
        os.path.join(out_dir, "variance_sweep.csv"),
        ["bag_size", "total_variance", "data_term", "seed_term"],
        [
            [row.bag_size, _fmt(row.total_variance), _fmt(row.data_term), _fmt(row.seed_term)]
            for row in sweep
        ],
    )

    curves = ablation_curves(config, seed)
    n_rows = curves["cart_train"].size
    write_csv(
        os.path.join(out_dir, "boosting_curves.csv"),
        ["stage", "cart_train", "cart_val", "extra_train", "extra_val"],
        [
            [
                m,
                _fmt(curves["cart_train"][m]), _fmt(curves["cart_val"][m]),
                _fmt(curves["extra_train"][m]), _fmt(curves["extra_val"][m]),
            ]
            for m in range(n_rows)
        ],
    )
    return {"report": report, "sweep": sweep, "curves": curves}
