"""Flat key-value experiment configuration with dotted section keys.

Lines look like `section.key = value`; `#` starts a comment. Values are
coerced to bool/int/float when they parse as one, and comma-separated values
become tuples. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from .errors import MissingConfigKey

DEFAULTS = {
    "seed": 0,
    "data.source": None,  # required: synthetic | csv
    "data.csv_path": None,
    "data.holidays_path": None,
    "data.train_days": 300,
    "data.lookback": 168,
    "data.horizon": 24,
    "data.stride": 24,
    "synthetic.days": 365,
    "synthetic.base_level": 100.0,
    "synthetic.daily_amplitude": 25.0,
    "synthetic.weekly_amplitude": 10.0,
    "synthetic.holiday_dip": 15.0,
    "synthetic.noise_sigma": 2.0,
    "synthetic.holiday_every": 30,
    "arima.p": 1,
    "arima.d": 1,
    "arima.q": 1,
    "nusvr.nu": 0.1,
    "nusvr.c_grid": (0.5, 1.0, 5.0),
    "nusvr.tol": 1e-3,
    "nusvr.max_iter": 200000,
    "elm.hidden_size": 1800,
    "elm.ridge": 1e-6,
    "elm.include_holiday": True,
    "elm.include_weekday": False,
    "lstm.n_layers": 2,
    "lstm.hidden_size": 32,
    "lstm.fc_size": 32,
    "lstm.epochs_phase1": 30,
    "lstm.epochs_phase2": 30,
    "lstm.lr_phase1": 1e-3,
    "lstm.lr_phase2": 1e-4,
    "lstm.batch_size": 32,
    "lstm.include_weekday": True,
    "lstm.include_holiday": True,
    "lstm.include_hour": False,
    "lstm.paper_scale": False,  # 2x128 units and the 100+130 epoch schedule
    "ensemble.elasticnet.alphas": (0.001, 0.01, 0.1, 1.0, 10.0, 100.0),
    "ensemble.elasticnet.rhos": (0.1, 0.3, 0.5, 0.7, 0.9),
    "ensemble.elasticnet.validation_fraction": 0.1,
    "ensemble.elasticnet.max_iters": 300,
    "ensemble.elasticnet.tol": 1e-4,
    "ensemble.sgtb.shrinkage": 0.05,
    "ensemble.sgtb.n_stages": 70,
    "ensemble.sgtb.subsample_ratio": 0.8,
    "ensemble.sgtb.max_depth": 3,
    "ensemble.sgtb.early_stop_patience": 0,  # 0 disables early stopping
    "ensemble.wgtb.shrinkage": 0.05,
    "ensemble.wgtb.n_stages": 70,
    "ensemble.wgtb.subsample_ratio": 0.8,
    "ensemble.wgtb.bag_size": 10,
    "ensemble.wgtb.max_depth": 3,
    "ensemble.wgtb.early_stop_patience": 10,
    "ensemble.bagging.n_trees": 100,
    "ensemble.bagging.max_depth": 0,  # 0 means unlimited depth
    "ensemble.extratree.n_trees": 100,
    "ensemble.extratree.max_depth": 0,
    "ensemble.random_forest.n_trees": 100,
    "ensemble.random_forest.max_depth": 0,
    "ensemble.random_forest.max_features": 32,
    "ensemble.adaboost.n_trees": 100,
    "ensemble.adaboost.max_depth": 3,
    "models.include": ("arima", "nusvr", "elm", "lstm", "elasticnet", "sgtb", "wgtb",
                       "bagging", "extratree", "random_forest", "adaboost"),
    "bias_variance.resamples": 200,
    "bias_variance.bag_sizes": (1, 10, 50),
    "bias_variance.datasets": 16,
    "bias_variance.seeds_per_dataset": 16,
    "bias_variance.tree_depth": 6,
    "bias_variance.ablation_stages": 150,
    "bias_variance.ablation_shrinkage": 0.15,
    "bias_variance.ablation_depth": 4,
    "bias_variance.ablation_seeds": 10,
}


def _coerce(text: str):
    text = text.strip()
    if "," in text:
        return tuple(_coerce(part) for part in text.split(",") if part.strip())
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config(path) -> dict:
    """Read a config file and overlay it on the defaults."""
    values = dict(DEFAULTS)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MissingConfigKey(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise MissingConfigKey(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(value)
    return values


def require(config: dict, key: str):
    """Fetch a key that must be set, naming it in the error."""
    value = config.get(key)
    if value is None:
        raise MissingConfigKey(f"config key {key!r} is required but not set")
    return value


def as_tuple(value) -> tuple:
    """Single scalars parse as scalars; lift them to 1-tuples."""
    return value if isinstance(value, tuple) else (value,)
