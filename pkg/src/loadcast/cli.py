"""Command-line entry point.

Subcommands: run, bias-variance, ablate-lstm-inputs, synth-data, predict,
evaluate. Every command takes --config/--seed/--out and fails with a stage
name and non-zero exit on any pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .config import DEFAULTS, parse_config
from .data import read_holiday_file, load_csv
from .errors import LoadcastError
from .evaluation import compute_metrics, generate_synthetic
from .persist import load_model
from .pipeline import (
    _fmt,
    ablate_lstm_inputs,
    bias_variance_lab,
    run_experiment,
    series_from_config,
    synthetic_spec_from_config,
    write_csv,
)
from .stacking import HybridBundle


def _load_config(args) -> dict:
    config = parse_config(args.config) if args.config else dict(DEFAULTS)
    if args.seed is not None:
        config["seed"] = args.seed
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    artifacts = run_experiment(config, args.out)
    for row in artifacts["report_rows"]:
        print(",".join(str(c) for c in row))
    print(f"report written to {os.path.join(args.out, 'report.csv')}")
    return 0


def _cmd_bias_variance(args) -> int:
    config = _load_config(args)
    bias_variance_lab(config, args.out)
    print(f"bias-variance reports written under {args.out}")
    return 0


def _cmd_ablate(args) -> int:
    config = _load_config(args)
    ablate_lstm_inputs(config, args.out)
    print(f"ablation grid written to {os.path.join(args.out, 'lstm_input_ablation.csv')}")
    return 0


def _cmd_synth_data(args) -> int:
    config = _load_config(args)
    spec = synthetic_spec_from_config(config, config["seed"])
    series, _ = generate_synthetic(spec)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "data.csv")
    rows = [
        [series.timestamp(t).isoformat(), _fmt(series.values[t])] for t in range(len(series))
    ]
    write_csv(csv_path, ["timestamp", "load"], rows)
    holidays_path = os.path.join(args.out, "holidays.txt")
    with open(holidays_path, "w", encoding="utf-8") as fh:
        for d, flag in enumerate(series.holiday_flags):
            if flag:
                fh.write(series.timestamp(d * 24).date().isoformat() + "\n")
    print(f"wrote {csv_path} and {holidays_path}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, HybridBundle):
        raise LoadcastError(
            f"predict needs a hybrid bundle, got {type(model).__name__}; "
            "point --model at models/hybrid.json from a run"
        )
    calendar = read_holiday_file(args.holidays) if args.holidays else frozenset()
    series = load_csv(args.data, calendar)
    stamps, forecasts = model.predict_series(series)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "forecast.csv")
    header = ["target_start"] + [f"h{h:02d}" for h in range(forecasts.shape[1])]
    rows = [
        [stamp.isoformat()] + [_fmt(v) for v in row] for stamp, row in zip(stamps, forecasts)
    ]
    write_csv(out_path, header, rows)
    print(f"forecasts written to {out_path}")
    return 0


def _read_prediction_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        return np.asarray([[float(c) for c in row[1:]] for row in reader])


def _cmd_evaluate(args) -> int:
    y_pred = _read_prediction_csv(args.predictions)
    y_true = _read_prediction_csv(args.actuals)
    report = compute_metrics(y_true, y_pred)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "metrics.csv")
    write_csv(
        out_path,
        ["metric", "value"],
        [
            ["mape", _fmt(report.mape)],
            ["mae", _fmt(report.mae)],
            ["rmse", _fmt(report.rmse)],
            ["n_samples", str(report.n_samples)],
            ["horizon", str(report.horizon)],
        ],
    )
    print(f"mape={report.mape} mae={report.mae} rmse={report.rmse}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadcast", description="Hourly load forecasting experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="experiment config file (flat key = value)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default="out", help="output directory")

    p_run = sub.add_parser("run", help="full pipeline: submodels, stacking, ensembles, report")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_bv = sub.add_parser("bias-variance", help="decomposition, bag sweep and boosting ablation")
    common(p_bv)
    p_bv.set_defaults(func=_cmd_bias_variance)

    p_ab = sub.add_parser("ablate-lstm-inputs", help="six calendar-input LSTM configurations")
    common(p_ab)
    p_ab.set_defaults(func=_cmd_ablate)

    p_sd = sub.add_parser("synth-data", help="write a synthetic load CSV and holiday file")
    common(p_sd)
    p_sd.set_defaults(func=_cmd_synth_data)

    p_pr = sub.add_parser("predict", help="forecast new data with a saved hybrid bundle")
    common(p_pr, config=False)
    p_pr.add_argument("--model", required=True, help="path to models/hybrid.json")
    p_pr.add_argument("--data", required=True, help="input load CSV")
    p_pr.add_argument("--holidays", default=None, help="holiday calendar file")
    p_pr.set_defaults(func=_cmd_predict)

    p_ev = sub.add_parser("evaluate", help="metrics between two prediction CSVs")
    common(p_ev, config=False)
    p_ev.add_argument("--predictions", required=True)
    p_ev.add_argument("--actuals", required=True)
    p_ev.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LoadcastError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
