import numpy as np
import pytest
from datetime import date, datetime, timedelta

from loadcast import errors
from loadcast.data import (
    HourlyLoadSeries,
    calendar_features,
    load_csv,
    make_windows,
    minmax_fit_transform,
    read_holiday_file,
    split_train_test,
)


def write_csv(path, rows, header="timestamp,load"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")


def hourly_rows(start, n, value=100.0):
    base = datetime.fromisoformat(start)
    return [f"{(base + timedelta(hours=i)).isoformat()},{value}" for i in range(n)]


def flat_series(n_hours, value=100.0, start="2017-01-02T00:00:00"):
    n_days = -(-n_hours // 24)
    return HourlyLoadSeries(
        start=datetime.fromisoformat(start),
        values=np.full(n_hours, value),
        holiday_flags=np.zeros(n_days, dtype=bool),
    )


def ramp_series(n_hours, start="2017-01-02T00:00:00"):
    n_days = -(-n_hours // 24)
    return HourlyLoadSeries(
        start=datetime.fromisoformat(start),
        values=np.arange(1.0, n_hours + 1.0),
        holiday_flags=np.zeros(n_days, dtype=bool),
    )


class TestLoadCsv:
    def test_well_formed_day(self, tmp_path):
        rows = hourly_rows("2017-01-01T00:00:00", 24)
        path = tmp_path / "day.csv"
        write_csv(path, rows)
        series = load_csv(path, holiday_calendar={date(2017, 1, 1)})
        assert len(series) == 24
        assert series.holiday_flags.tolist() == [True]
        assert np.all(series.values == 100.0)

    def test_missing_hour_rejected(self, tmp_path):
        rows = hourly_rows("2017-01-01T00:00:00", 24)
        del rows[13]
        path = tmp_path / "gap.csv"
        write_csv(path, rows)
        with pytest.raises(errors.MissingTimestamp):
            load_csv(path)

    def test_negative_load_rejected(self, tmp_path):
        rows = hourly_rows("2017-01-01T00:00:00", 24)
        rows[5] = rows[5].rsplit(",", 1)[0] + ",-5"
        path = tmp_path / "neg.csv"
        write_csv(path, rows)
        with pytest.raises(errors.NonPositiveLoad):
            load_csv(path)

    def test_malformed_row_rejected(self, tmp_path):
        rows = hourly_rows("2017-01-01T00:00:00", 24)
        rows[3] = "not-a-timestamp,100"
        path = tmp_path / "bad.csv"
        write_csv(path, rows)
        with pytest.raises(errors.MalformedRow):
            load_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "hdr.csv"
        write_csv(path, hourly_rows("2017-01-01T00:00:00", 24), header="time,value")
        with pytest.raises(errors.MalformedRow):
            load_csv(path)


class TestMinmax:
    def test_definition(self):
        scaled, state = minmax_fit_transform([0.0, 50.0, 100.0])
        assert scaled.tolist() == [0.0, 0.5, 1.0]
        assert (state.vmin, state.vmax) == (0.0, 100.0)

    def test_roundtrip_random(self):
        rng = np.random.default_rng(7)
        values = rng.uniform(10, 500, size=200)
        scaled, state = minmax_fit_transform(values)
        back = state.denormalize(scaled)
        assert np.max(np.abs(back - values) / values) < 1e-12

    def test_constant_rejected(self):
        with pytest.raises(errors.DegenerateRange):
            minmax_fit_transform([7.0, 7.0, 7.0])

    def test_empty_rejected(self):
        with pytest.raises(errors.EmptyInput):
            minmax_fit_transform([])


class TestCalendarFeatures:
    def test_monday_index_zero(self):
        feats = calendar_features(datetime(2017, 1, 2), frozenset())
        assert feats.weekday_onehot.tolist() == [1, 0, 0, 0, 0, 0, 0]

    def test_holiday_flag_set(self):
        feats = calendar_features(datetime(2017, 1, 1), {date(2017, 1, 1)})
        assert feats.holiday_flag == 1

    def test_non_holiday_flag_clear(self):
        feats = calendar_features(datetime(2017, 1, 3), {date(2017, 1, 1)})
        assert feats.holiday_flag == 0

    def test_hour_onehot_optional(self):
        feats = calendar_features(datetime(2017, 1, 2, 13), frozenset(), include_hour=True)
        assert feats.hour_onehot[13] == 1.0
        assert feats.hour_onehot.sum() == 1.0
        assert calendar_features(datetime(2017, 1, 2), frozenset()).hour_onehot is None


class TestHolidayFile:
    def test_reads_dates(self, tmp_path):
        path = tmp_path / "holidays.txt"
        path.write_text("2017-01-01\n\n2017-10-01\n")
        assert read_holiday_file(path) == frozenset({date(2017, 1, 1), date(2017, 10, 1)})

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "holidays.txt"
        path.write_text("january first\n")
        with pytest.raises(errors.MalformedRow):
            read_holiday_file(path)


class TestMakeWindows:
    def test_single_window(self):
        windows = make_windows(ramp_series(192))
        assert windows.n_samples == 1

    def test_too_short(self):
        with pytest.raises(errors.SeriesTooShort):
            make_windows(ramp_series(191))

    def test_full_year_count(self):
        windows = make_windows(ramp_series(8760))
        assert windows.n_samples == (8760 - 192) // 24 + 1 == 358

    def test_window_reconstruction(self):
        # consecutive stride-24 windows tile the series exactly
        series = ramp_series(24 * 12)
        windows = make_windows(series)
        rebuilt = np.concatenate(
            [windows.raw_inputs[0]] + [w for w in windows.targets]
        )
        assert np.array_equal(rebuilt, series.values[: rebuilt.size])
        for i in range(windows.n_samples):
            s = windows.start_indices[i]
            assert np.array_equal(windows.raw_inputs[i], series.values[s : s + 168])
            assert np.array_equal(windows.targets[i], series.values[s + 168 : s + 192])


class TestSplit:
    def test_year_split_counts(self):
        windows = make_windows(ramp_series(8760))
        train, test = split_train_test(windows, train_days=300)
        # oracle: enumerate window spans against the day-300 boundary
        expected_train = sum(
            1 for s in range(0, 8760 - 192 + 1, 24) if s + 192 <= 300 * 24
        )
        assert train.n_samples == expected_train == 293
        assert test.n_samples == 358 - 293 == 65

    def test_no_leakage(self):
        windows = make_windows(ramp_series(24 * 30))
        train, test = split_train_test(windows, train_days=20)
        max_train_target = max(
            s + 192 for s in train.start_indices
        )
        min_test_input_end = min(s + 168 for s in test.start_indices)
        assert max_train_target <= min_test_input_end + 24  # spans touch at the boundary
        last_train_target_hour = max(s + 191 for s in train.start_indices)
        first_test_input_end_hour = min(s + 168 for s in test.start_indices)
        assert last_train_target_hour < first_test_input_end_hour

    def test_normalizer_fit_on_train_only(self):
        series = ramp_series(24 * 30)
        windows = make_windows(series)
        train, test = split_train_test(windows, train_days=20)
        assert train.normalizer.vmax == series.values[20 * 24 - 1]
        assert test.normalizer is train.normalizer or (
            test.normalizer.vmin == train.normalizer.vmin
            and test.normalizer.vmax == train.normalizer.vmax
        )
        # test inputs normalized with the train normalizer can exceed 1
        assert test.inputs.max() > 1.0

    def test_all_train_rejected(self):
        windows = make_windows(ramp_series(24 * 30))
        with pytest.raises(errors.EmptySplit):
            split_train_test(windows, train_days=30)

    def test_zero_days_rejected(self):
        windows = make_windows(ramp_series(24 * 30))
        with pytest.raises(errors.EmptySplit):
            split_train_test(windows, train_days=0)


class TestFeatures:
    def test_flat_feature_layout(self):
        series = ramp_series(24 * 10)
        windows = make_windows(series)
        feats = windows.features(include_weekday=True, include_holiday=True)
        assert feats.shape == (windows.n_samples, 168 + 7 + 1)
        # series starts Monday; window i targets day 7 + i
        wd = feats[:, 168:175]
        for i in range(windows.n_samples):
            assert wd[i].argmax() == (7 + i) % 7

    def test_sequence_feature_layout(self):
        series = ramp_series(24 * 10)
        windows = make_windows(series)
        seq = windows.sequence_features(include_weekday=True, include_holiday=True, include_hour=True)
        assert seq.shape == (windows.n_samples, 168, 1 + 7 + 1 + 24)
        hours = seq[0, :, 9:].argmax(axis=1)
        assert hours.tolist() == [h % 24 for h in range(168)]
