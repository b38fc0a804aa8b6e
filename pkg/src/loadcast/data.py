"""Hourly load ingestion, calendar features, normalization and windowing."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta

import numpy as np

from .errors import (
    DegenerateRange,
    EmptyInput,
    EmptySplit,
    MalformedRow,
    MissingTimestamp,
    NonPositiveLoad,
    SeriesTooShort,
)

HOURS_PER_DAY = 24
DEFAULT_LOOKBACK = 168
DEFAULT_HORIZON = 24
DEFAULT_STRIDE = 24


@dataclass(frozen=True)
class NormalizerState:
    """Min-max scaling state fitted on training data; maps loads to [0, 1]."""

    vmin: float
    vmax: float

    def __post_init__(self):
        if not (self.vmax > self.vmin):
            raise DegenerateRange(f"max ({self.vmax}) must exceed min ({self.vmin})")

    def normalize(self, values):
        return (np.asarray(values, dtype=float) - self.vmin) / (self.vmax - self.vmin)

    def denormalize(self, values):
        return np.asarray(values, dtype=float) * (self.vmax - self.vmin) + self.vmin


def minmax_fit_transform(values):
    """Fit a min-max normalizer and return (scaled values, state)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput("cannot normalize an empty sequence")
    state = NormalizerState(float(arr.min()), float(arr.max()))
    return state.normalize(arr), state


@dataclass(frozen=True)
class HourlyLoadSeries:
    """Gap-free hourly loads (10^4 kWh) with one holiday flag per day chunk."""

    start: datetime
    values: np.ndarray
    holiday_flags: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        flags = np.asarray(self.holiday_flags, dtype=bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "holiday_flags", flags)
        if values.ndim != 1 or values.size == 0:
            raise EmptyInput("series must hold at least one hourly value")
        if not np.all(np.isfinite(values)) or not np.all(values > 0):
            raise NonPositiveLoad("all load values must be finite and > 0")
        n_days = -(-values.size // HOURS_PER_DAY)  # ceil
        if flags.shape != (n_days,):
            raise MalformedRow(
                f"expected {n_days} holiday flags for {values.size} hours, got {flags.shape}"
            )

    def __len__(self):
        return self.values.size

    def timestamp(self, hour_index: int) -> datetime:
        return self.start + timedelta(hours=int(hour_index))

    def hour_of_day(self, hour_index):
        return (self.start.hour + np.asarray(hour_index)) % HOURS_PER_DAY

    def weekday(self, hour_index):
        """Calendar weekday (Monday=0) of each hour index."""
        day_offset = (self.start.hour + np.asarray(hour_index)) // HOURS_PER_DAY
        return (self.start.weekday() + day_offset) % 7

    def holiday(self, hour_index):
        """Holiday flag of the day chunk holding each hour index."""
        return self.holiday_flags[np.asarray(hour_index) // HOURS_PER_DAY]


@dataclass(frozen=True)
class CalendarFeatures:
    weekday_onehot: np.ndarray  # 7-dim, Monday = index 0
    holiday_flag: int
    hour_onehot: np.ndarray | None = None  # 24-dim, optional


def calendar_features(timestamp: datetime, holiday_calendar, include_hour=False) -> CalendarFeatures:
    """Calendar one-hots for one timestamp; holiday iff its date is in the calendar."""
    weekday = np.zeros(7)
    weekday[timestamp.weekday()] = 1.0
    flag = 1 if timestamp.date() in holiday_calendar else 0
    hour = None
    if include_hour:
        hour = np.zeros(HOURS_PER_DAY)
        hour[timestamp.hour] = 1.0
    return CalendarFeatures(weekday_onehot=weekday, holiday_flag=flag, hour_onehot=hour)


def read_holiday_file(path) -> frozenset:
    """Read a holiday calendar: one ISO-8601 date per line, blanks ignored."""
    days = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                days.add(date.fromisoformat(text))
            except ValueError as exc:
                raise MalformedRow(f"{path}:{lineno}: not an ISO date: {text!r}") from exc
    return frozenset(days)


def load_csv(path, holiday_calendar=frozenset()) -> HourlyLoadSeries:
    """Read a `timestamp,load` CSV into a validated hourly series.

    Timestamps must be ISO-8601 on exact hour boundaries with no gaps;
    loads must parse to finite positive numbers.
    """
    timestamps = []
    values = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["timestamp", "load"]:
            raise MalformedRow(f"{path}: expected header 'timestamp,load', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise MalformedRow(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise MalformedRow(f"{path}:{lineno}: bad timestamp {row[0]!r}") from exc
            if ts.minute or ts.second or ts.microsecond:
                raise MalformedRow(f"{path}:{lineno}: timestamp not on an hour boundary: {row[0]!r}")
            try:
                load = float(row[1])
            except ValueError as exc:
                raise MalformedRow(f"{path}:{lineno}: bad load value {row[1]!r}") from exc
            if not np.isfinite(load) or load <= 0:
                raise NonPositiveLoad(f"{path}:{lineno}: load must be finite and > 0, got {row[1]}")
            timestamps.append(ts)
            values.append(load)
    if not timestamps:
        raise MalformedRow(f"{path}: no data rows")
    for prev, cur in zip(timestamps, timestamps[1:]):
        if cur != prev + timedelta(hours=1):
            raise MissingTimestamp(f"{path}: cadence break between {prev} and {cur}")
    start = timestamps[0]
    n_days = -(-len(values) // HOURS_PER_DAY)
    flags = np.array(
        [
            (start + timedelta(hours=d * HOURS_PER_DAY)).date() in holiday_calendar
            for d in range(n_days)
        ],
        dtype=bool,
    )
    return HourlyLoadSeries(start=start, values=np.asarray(values, dtype=float), holiday_flags=flags)


@dataclass(frozen=True)
class SupervisedWindowSet:
    """Samples pairing a lookback window of inputs with the next horizon of targets.

    `inputs` are normalized loads; `targets` and `raw_inputs` stay in original
    units. Per-sample calendar features describe the target day.
    """

    inputs: np.ndarray          # (N, lookback), normalized
    targets: np.ndarray         # (N, horizon), original units
    raw_inputs: np.ndarray      # (N, lookback), original units
    weekday_onehot: np.ndarray  # (N, 7), target day
    holiday_flag: np.ndarray    # (N,), target day
    start_indices: np.ndarray   # (N,), hour offset of each input window in the series
    normalizer: NormalizerState
    series: HourlyLoadSeries = field(repr=False)
    lookback: int = DEFAULT_LOOKBACK
    horizon: int = DEFAULT_HORIZON

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    def normalized_targets(self) -> np.ndarray:
        return self.normalizer.normalize(self.targets)

    def target_start_timestamps(self):
        return [self.series.timestamp(s + self.lookback) for s in self.start_indices]

    def slice(self, indices) -> "SupervisedWindowSet":
        idx = np.asarray(indices, dtype=int)
        return replace(
            self,
            inputs=self.inputs[idx],
            targets=self.targets[idx],
            raw_inputs=self.raw_inputs[idx],
            weekday_onehot=self.weekday_onehot[idx],
            holiday_flag=self.holiday_flag[idx],
            start_indices=self.start_indices[idx],
        )

    def features(self, include_weekday=False, include_holiday=False, include_hour=False):
        """Flat per-sample features: normalized loads plus target-day one-hots."""
        blocks = [self.inputs]
        if include_weekday:
            blocks.append(self.weekday_onehot)
        if include_holiday:
            blocks.append(self.holiday_flag[:, None].astype(float))
        if include_hour:
            hour = np.zeros((self.n_samples, HOURS_PER_DAY))
            starts = self.series.hour_of_day(self.start_indices + self.lookback)
            hour[np.arange(self.n_samples), starts] = 1.0
            blocks.append(hour)
        return np.hstack(blocks)

    def sequence_features(self, include_weekday=False, include_holiday=False, include_hour=False):
        """Per-timestep features over the lookback window, shaped (N, lookback, F)."""
        hours = self.start_indices[:, None] + np.arange(self.lookback)[None, :]
        blocks = [self.inputs[:, :, None]]
        if include_weekday:
            wd = self.series.weekday(hours)
            onehot = np.zeros((self.n_samples, self.lookback, 7))
            np.put_along_axis(onehot, wd[:, :, None], 1.0, axis=2)
            blocks.append(onehot)
        if include_holiday:
            blocks.append(self.series.holiday(hours)[:, :, None].astype(float))
        if include_hour:
            hod = self.series.hour_of_day(hours)
            onehot = np.zeros((self.n_samples, self.lookback, HOURS_PER_DAY))
            np.put_along_axis(onehot, hod[:, :, None], 1.0, axis=2)
            blocks.append(onehot)
        return np.concatenate(blocks, axis=2)


def _build_window_set(series, start_indices, lookback, horizon, normalizer) -> SupervisedWindowSet:
    starts = np.asarray(start_indices, dtype=int)
    raw_inputs = np.stack([series.values[s : s + lookback] for s in starts])
    targets = np.stack([series.values[s + lookback : s + lookback + horizon] for s in starts])
    target_starts = starts + lookback
    weekdays = series.weekday(target_starts)
    onehot = np.zeros((starts.size, 7))
    onehot[np.arange(starts.size), weekdays] = 1.0
    return SupervisedWindowSet(
        inputs=normalizer.normalize(raw_inputs),
        targets=targets,
        raw_inputs=raw_inputs,
        weekday_onehot=onehot,
        holiday_flag=series.holiday(target_starts).astype(int),
        start_indices=starts,
        normalizer=normalizer,
        series=series,
        lookback=lookback,
        horizon=horizon,
    )


def make_windows(
    series: HourlyLoadSeries,
    lookback: int = DEFAULT_LOOKBACK,
    horizon: int = DEFAULT_HORIZON,
    stride: int = DEFAULT_STRIDE,
    normalizer: NormalizerState | None = None,
) -> SupervisedWindowSet:
    """Window the series into contiguous (lookback -> horizon) samples.

    Window count is floor((len - lookback - horizon) / stride) + 1. When no
    normalizer is supplied one is fitted on the whole series; `split_train_test`
    refits it on the training portion only.
    """
    n = len(series)
    if n < lookback + horizon:
        raise SeriesTooShort(f"need at least {lookback + horizon} hours, have {n}")
    count = (n - lookback - horizon) // stride + 1
    starts = np.arange(count) * stride
    if normalizer is None:
        _, normalizer = minmax_fit_transform(series.values)
    return _build_window_set(series, starts, lookback, horizon, normalizer)


def split_train_test(windows: SupervisedWindowSet, train_days: int):
    """Chronological split: training windows are those fully inside the first
    `train_days` days; the normalizer is refitted on those days only."""
    if train_days < 1:
        raise EmptySplit("train_days must be >= 1")
    boundary_hour = train_days * HOURS_PER_DAY
    span = windows.lookback + windows.horizon
    is_train = windows.start_indices + span <= boundary_hour
    if not is_train.any():
        raise EmptySplit(f"no window fits inside the first {train_days} days")
    if is_train.all():
        raise EmptySplit(f"train_days={train_days} leaves no test windows")
    series = windows.series
    train_values = series.values[: min(boundary_hour, len(series))]
    _, normalizer = minmax_fit_transform(train_values)
    train = _build_window_set(
        series, windows.start_indices[is_train], windows.lookback, windows.horizon, normalizer
    )
    test = _build_window_set(
        series, windows.start_indices[~is_train], windows.lookback, windows.horizon, normalizer
    )
    return train, test
