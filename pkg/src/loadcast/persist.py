"""Versioned JSON persistence for every model kind.

Files look like {"format_version": 1, "kind": "...", "payload": {...}}.
Arrays are stored as nested lists; Python's repr round-trips every finite
float exactly, so load(save(m)) predicts identically to m.
"""

from __future__ import annotations

import json

import numpy as np

from .baselines import Forest
from .boosting import BoostedModel, BoostParams, BoostStage, EarlyStopping
from .data import NormalizerState
from .errors import CorruptFile, VersionMismatch
from .linear import ElasticNetModel, Standardizer
from .stacking import HybridBundle, PerHourModel
from .submodels.arima import ArimaForecaster, ArimaModel
from .submodels.elm import ElmForecaster, ElmModel
from .submodels.lstm import LstmConfig, LstmForecaster, LstmModel
from .submodels.nusvr import NusvrForecaster, NusvrModel
from .tree import RegressionTree, TreeParams

FORMAT_VERSION = 1


def _arr(values, dtype=float):
    return np.asarray(values, dtype=dtype)


# --- payload builders, one pair per kind ---------------------------------

def _tree_payload(tree: RegressionTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
        "n_features": tree.n_features,
    }


def _tree_load(payload: dict) -> RegressionTree:
    return RegressionTree(
        feature=_arr(payload["feature"], np.int32),
        threshold=_arr(payload["threshold"]),
        left=_arr(payload["left"], np.int32),
        right=_arr(payload["right"], np.int32),
        value=_arr(payload["value"]),
        n_features=int(payload["n_features"]),
    )


def _tree_params_payload(params: TreeParams) -> dict:
    return {
        "max_depth": params.max_depth,
        "min_samples_split": params.min_samples_split,
        "min_samples_leaf": params.min_samples_leaf,
        "n_candidate_features": params.n_candidate_features,
        "seed": params.seed,
    }


def _tree_params_load(payload: dict) -> TreeParams:
    return TreeParams(**payload)


def _forest_payload(forest: Forest) -> dict:
    return {
        "kind": forest.kind,
        "tree_weights": forest.tree_weights.tolist(),
        "trees": [_tree_payload(t) for t in forest.trees],
        "n_features": forest.n_features,
        "params": _tree_params_payload(forest.params),
    }


def _forest_load(payload: dict) -> Forest:
    return Forest(
        trees=[_tree_load(p) for p in payload["trees"]],
        tree_weights=_arr(payload["tree_weights"]),
        kind=payload["kind"],
        n_features=int(payload["n_features"]),
        params=_tree_params_load(payload["params"]),
    )


def _elasticnet_payload(model: ElasticNetModel) -> dict:
    return {
        "w": model.w.tolist(),
        "intercept": model.intercept,
        "alpha": model.alpha,
        "rho": model.rho,
        "mean": model.standardizer.mean.tolist(),
        "scale": model.standardizer.scale.tolist(),
        "n_sweeps": model.n_sweeps,
    }


def _elasticnet_load(payload: dict) -> ElasticNetModel:
    return ElasticNetModel(
        w=_arr(payload["w"]),
        intercept=float(payload["intercept"]),
        alpha=float(payload["alpha"]),
        rho=float(payload["rho"]),
        standardizer=Standardizer(mean=_arr(payload["mean"]), scale=_arr(payload["scale"])),
        n_sweeps=int(payload["n_sweeps"]),
    )


def _boost_params_payload(params: BoostParams) -> dict:
    early = params.early_stopping
    return {
        "shrinkage": params.shrinkage,
        "n_stages": params.n_stages,
        "subsample_ratio": params.subsample_ratio,
        "base_kind": params.base_kind,
        "bag_size": params.bag_size,
        "tree_params": _tree_params_payload(params.tree_params),
        "seed": params.seed,
        "early_stopping": None
        if early is None
        else {"patience": early.patience, "validation_fraction": early.validation_fraction},
    }


def _boost_params_load(payload: dict) -> BoostParams:
    early = payload["early_stopping"]
    return BoostParams(
        shrinkage=payload["shrinkage"],
        n_stages=payload["n_stages"],
        subsample_ratio=payload["subsample_ratio"],
        base_kind=payload["base_kind"],
        bag_size=payload["bag_size"],
        tree_params=_tree_params_load(payload["tree_params"]),
        seed=payload["seed"],
        early_stopping=None if early is None else EarlyStopping(**early),
    )


def _boosted_payload(model: BoostedModel) -> dict:
    stages = []
    for stage in model.stages:
        if isinstance(stage.estimator, RegressionTree):
            est = {"type": "tree", "payload": _tree_payload(stage.estimator)}
        else:
            est = {"type": "forest", "payload": _forest_payload(stage.estimator)}
        stages.append({"gamma": stage.gamma, "estimator": est})
    return {
        "init_kind": model.init_kind,
        "init_value": model.init_value,
        "init_model": None if model.init_model is None else _elasticnet_payload(model.init_model),
        "stages": stages,
        "params": _boost_params_payload(model.params),
        "train_curve": model.train_curve.tolist(),
        "val_curve": None if model.val_curve is None else model.val_curve.tolist(),
    }


def _boosted_load(payload: dict) -> BoostedModel:
    stages = []
    for item in payload["stages"]:
        est = item["estimator"]
        estimator = _tree_load(est["payload"]) if est["type"] == "tree" else _forest_load(est["payload"])
        stages.append(BoostStage(gamma=float(item["gamma"]), estimator=estimator))
    return BoostedModel(
        init_kind=payload["init_kind"],
        init_value=payload["init_value"],
        init_model=None if payload["init_model"] is None else _elasticnet_load(payload["init_model"]),
        stages=stages,
        params=_boost_params_load(payload["params"]),
        train_curve=_arr(payload["train_curve"]),
        val_curve=None if payload["val_curve"] is None else _arr(payload["val_curve"]),
    )


def _normalizer_payload(norm: NormalizerState) -> dict:
    return {"vmin": norm.vmin, "vmax": norm.vmax}


def _normalizer_load(payload: dict) -> NormalizerState:
    return NormalizerState(vmin=float(payload["vmin"]), vmax=float(payload["vmax"]))


def _arima_payload(model: ArimaModel) -> dict:
    return {
        "p": model.p,
        "d": model.d,
        "q": model.q,
        "c": model.c,
        "phi": model.phi.tolist(),
        "theta": model.theta.tolist(),
        "residuals": model.residuals.tolist(),
        "clamped": model.clamped,
    }


def _arima_load(payload: dict) -> ArimaModel:
    return ArimaModel(
        p=int(payload["p"]),
        d=int(payload["d"]),
        q=int(payload["q"]),
        c=float(payload["c"]),
        phi=_arr(payload["phi"]),
        theta=_arr(payload["theta"]),
        residuals=_arr(payload["residuals"]),
        clamped=bool(payload["clamped"]),
    )


def _arima_forecaster_payload(fc: ArimaForecaster) -> dict:
    return {"orders": list(fc.orders), "model": None if fc.model is None else _arima_payload(fc.model)}


def _arima_forecaster_load(payload: dict) -> ArimaForecaster:
    fc = ArimaForecaster(orders=tuple(payload["orders"]))
    fc.model = None if payload["model"] is None else _arima_load(payload["model"])
    return fc


def _nusvr_payload(model: NusvrModel) -> dict:
    return {
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "epsilon": model.epsilon,
        "gamma": model.gamma,
        "nu": model.nu,
        "C": model.C,
        "n_features": model.n_features,
        "n_iter": model.n_iter,
        "kkt_violation": model.kkt_violation,
    }


def _nusvr_load(payload: dict) -> NusvrModel:
    return NusvrModel(
        support_vectors=_arr(payload["support_vectors"]).reshape(-1, int(payload["n_features"])),
        dual_coefs=_arr(payload["dual_coefs"]),
        bias=float(payload["bias"]),
        epsilon=float(payload["epsilon"]),
        gamma=float(payload["gamma"]),
        nu=float(payload["nu"]),
        C=float(payload["C"]),
        n_features=int(payload["n_features"]),
        n_iter=int(payload["n_iter"]),
        kkt_violation=float(payload["kkt_violation"]),
    )


def _nusvr_forecaster_payload(fc: NusvrForecaster) -> dict:
    return {
        "nu": fc.nu,
        "C_grid": list(fc.C_grid),
        "gamma": fc.gamma,
        "tol": fc.tol,
        "validation_fraction": fc.validation_fraction,
        "max_iter": fc.max_iter,
        "models": None if fc.models is None else [_nusvr_payload(m) for m in fc.models],
        "normalizer": None if fc.normalizer is None else _normalizer_payload(fc.normalizer),
    }


def _nusvr_forecaster_load(payload: dict) -> NusvrForecaster:
    fc = NusvrForecaster(
        nu=payload["nu"],
        C_grid=tuple(payload["C_grid"]),
        gamma=payload["gamma"],
        tol=payload["tol"],
        validation_fraction=payload["validation_fraction"],
        max_iter=payload["max_iter"],
    )
    if payload["models"] is not None:
        fc.models = [_nusvr_load(p) for p in payload["models"]]
    if payload["normalizer"] is not None:
        fc.normalizer = _normalizer_load(payload["normalizer"])
    return fc


def _elm_payload(model: ElmModel) -> dict:
    return {
        "hidden_weights": model.hidden_weights.tolist(),
        "hidden_biases": model.hidden_biases.tolist(),
        "output_weights": model.output_weights.tolist(),
        "ridge": model.ridge,
    }


def _elm_load(payload: dict) -> ElmModel:
    return ElmModel(
        hidden_weights=_arr(payload["hidden_weights"]),
        hidden_biases=_arr(payload["hidden_biases"]),
        output_weights=_arr(payload["output_weights"]),
        ridge=float(payload["ridge"]),
    )


def _elm_forecaster_payload(fc: ElmForecaster) -> dict:
    return {
        "hidden_size": fc.hidden_size,
        "ridge": fc.ridge,
        "seed": fc.seed,
        "include_holiday": fc.include_holiday,
        "include_weekday": fc.include_weekday,
        "model": None if fc.model is None else _elm_payload(fc.model),
        "normalizer": None if fc.normalizer is None else _normalizer_payload(fc.normalizer),
    }


def _elm_forecaster_load(payload: dict) -> ElmForecaster:
    fc = ElmForecaster(
        hidden_size=payload["hidden_size"],
        ridge=payload["ridge"],
        seed=payload["seed"],
        include_holiday=payload["include_holiday"],
        include_weekday=payload["include_weekday"],
    )
    if payload["model"] is not None:
        fc.model = _elm_load(payload["model"])
    if payload["normalizer"] is not None:
        fc.normalizer = _normalizer_load(payload["normalizer"])
    return fc


def _lstm_config_payload(config: LstmConfig) -> dict:
    return {
        "n_layers": config.n_layers,
        "hidden_size": config.hidden_size,
        "fc_size": config.fc_size,
        "output_size": config.output_size,
        "epochs": list(config.epochs),
        "learning_rates": list(config.learning_rates),
        "batch_size": config.batch_size,
        "beta1": config.beta1,
        "beta2": config.beta2,
        "adam_eps": config.adam_eps,
        "seed": config.seed,
        "include_weekday": config.include_weekday,
        "include_holiday": config.include_holiday,
        "include_hour": config.include_hour,
    }


def _lstm_config_load(payload: dict) -> LstmConfig:
    payload = dict(payload)
    payload["epochs"] = tuple(payload["epochs"])
    payload["learning_rates"] = tuple(payload["learning_rates"])
    return LstmConfig(**payload)


def _lstm_forecaster_payload(fc: LstmForecaster) -> dict:
    model = None
    if fc.model is not None:
        model = {
            "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in fc.model.params.items()},
            "input_size": fc.model.input_size,
            "train_losses": fc.model.train_losses.tolist(),
        }
    return {
        "config": _lstm_config_payload(fc.config),
        "model": model,
        "normalizer": None if fc.normalizer is None else _normalizer_payload(fc.normalizer),
    }


def _lstm_forecaster_load(payload: dict) -> LstmForecaster:
    config = _lstm_config_load(payload["config"])
    fc = LstmForecaster(config)
    if payload["model"] is not None:
        params = {
            k: _arr(v["data"]).reshape(v["shape"]) for k, v in payload["model"]["params"].items()
        }
        fc.model = LstmModel(
            params=params,
            config=config,
            input_size=int(payload["model"]["input_size"]),
            train_losses=_arr(payload["model"]["train_losses"]),
        )
    if payload["normalizer"] is not None:
        fc.normalizer = _normalizer_load(payload["normalizer"])
    return fc


_SCALAR_KINDS = {
    ElasticNetModel: ("elasticnet", _elasticnet_payload),
    BoostedModel: ("boosted", _boosted_payload),
    Forest: ("forest", _forest_payload),
    RegressionTree: ("regression_tree", _tree_payload),
}

_SCALAR_LOADERS = {
    "elasticnet": _elasticnet_load,
    "boosted": _boosted_load,
    "forest": _forest_load,
    "regression_tree": _tree_load,
}


def _per_hour_payload(model: PerHourModel) -> dict:
    entries = []
    for m in model.models:
        kind, builder = _SCALAR_KINDS[type(m)]
        entries.append({"kind": kind, "payload": builder(m)})
    return {"kind": model.kind, "models": entries}


def _per_hour_load(payload: dict) -> PerHourModel:
    models = [_SCALAR_LOADERS[item["kind"]](item["payload"]) for item in payload["models"]]
    return PerHourModel(kind=payload["kind"], models=models)


_FORECASTER_KINDS = {
    ArimaForecaster: ("arima", _arima_forecaster_payload),
    NusvrForecaster: ("nusvr", _nusvr_forecaster_payload),
    ElmForecaster: ("elm", _elm_forecaster_payload),
    LstmForecaster: ("lstm", _lstm_forecaster_payload),
}

_FORECASTER_LOADERS = {
    "arima": _arima_forecaster_load,
    "nusvr": _nusvr_forecaster_load,
    "elm": _elm_forecaster_load,
    "lstm": _lstm_forecaster_load,
}


def _hybrid_payload(bundle: HybridBundle) -> dict:
    submodels = {}
    for name, fc in bundle.submodels.items():
        kind, builder = _FORECASTER_KINDS[type(fc)]
        submodels[name] = {"kind": kind, "payload": builder(fc)}
    return {
        "submodels": submodels,
        "ensemble": _per_hour_payload(bundle.ensemble),
        "normalizer": _normalizer_payload(bundle.normalizer),
        "lookback": bundle.lookback,
        "horizon": bundle.horizon,
        "stride": bundle.stride,
    }


def _hybrid_load(payload: dict) -> HybridBundle:
    submodels = {
        name: _FORECASTER_LOADERS[item["kind"]](item["payload"])
        for name, item in payload["submodels"].items()
    }
    return HybridBundle(
        submodels=submodels,
        ensemble=_per_hour_load(payload["ensemble"]),
        normalizer=_normalizer_load(payload["normalizer"]),
        lookback=int(payload["lookback"]),
        horizon=int(payload["horizon"]),
        stride=int(payload["stride"]),
    )


_SAVERS = {
    RegressionTree: ("regression_tree", _tree_payload),
    Forest: ("forest", _forest_payload),
    ElasticNetModel: ("elasticnet", _elasticnet_payload),
    BoostedModel: ("boosted", _boosted_payload),
    ArimaForecaster: ("arima_forecaster", _arima_forecaster_payload),
    NusvrForecaster: ("nusvr_forecaster", _nusvr_forecaster_payload),
    ElmForecaster: ("elm_forecaster", _elm_forecaster_payload),
    LstmForecaster: ("lstm_forecaster", _lstm_forecaster_payload),
    PerHourModel: ("per_hour", _per_hour_payload),
    HybridBundle: ("hybrid", _hybrid_payload),
}

_LOADERS = {
    "regression_tree": _tree_load,
    "forest": _forest_load,
    "elasticnet": _elasticnet_load,
    "boosted": _boosted_load,
    "arima_forecaster": _arima_forecaster_load,
    "nusvr_forecaster": _nusvr_forecaster_load,
    "elm_forecaster": _elm_forecaster_load,
    "lstm_forecaster": _lstm_forecaster_load,
    "per_hour": _per_hour_load,
    "hybrid": _hybrid_load,
}


def save_model(model, path) -> None:
    try:
        kind, builder = _SAVERS[type(model)]
    except KeyError:
        raise CorruptFile(f"no serializer for {type(model).__name__}") from None
    doc = {"format_version": FORMAT_VERSION, "kind": kind, "payload": builder(model)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"{path}: not valid model JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CorruptFile(f"{path}: missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format_version {doc['format_version']!r}, expected {FORMAT_VERSION}"
        )
    kind = doc.get("kind")
    if kind not in _LOADERS:
        raise CorruptFile(f"{path}: unknown model kind {kind!r}")
    try:
        return _LOADERS[kind](doc["payload"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"{path}: malformed payload for kind {kind!r}: {exc}") from exc
