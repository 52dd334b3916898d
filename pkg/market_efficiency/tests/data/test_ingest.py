# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from datetime import date

import numpy as np
import pytest

from market_efficiency.data.ingest import (
    CoverageStatus,
    load_price_csv,
    PriceSeries,
    validate_span,
    write_price_csv,
)
from market_efficiency.datatypes import CalendarKind, ColumnSpec
from market_efficiency.errors import (
    DataError,
    DuplicateDate,
    EmptySeries,
    NonPositivePrice,
    ParseError,
    PriceFileNotFound,
)


def _daily(start: date, n: int):
    return tuple(date.fromordinal(start.toordinal() + i) for i in range(n))


class TestLoadPriceCsv:

    def test_two_rows(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", 101)])
        series = load_price_csv(path)
        assert len(series) == 2
        assert series.dates == (date(2020, 1, 1), date(2020, 1, 2))
        assert series.closes.tolist() == [100.0, 101.0]
        assert series.instrument == "prices"

    def test_duplicate_date(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", 101), ("2020-01-02", 102)])
        with pytest.raises(DuplicateDate) as e:
            load_price_csv(path)
        assert e.value.row == 3
        assert e.value.exit_code == 2

    def test_zero_close_rejected(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", 0), ("2020-01-03", 101)])
        with pytest.raises(NonPositivePrice) as e:
            load_price_csv(path)
        assert e.value.row == 2

    def test_zero_close_skipped(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", 0), ("2020-01-03", 101)])
        series = load_price_csv(path, skip_bad_rows=True)
        assert len(series) == 2
        assert len(series.skipped) == 1
        assert series.skipped[0].row == 2
        assert date(2020, 1, 2) not in series.dates

    def test_missing_close(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", ""), ("2020-01-03", 101)])
        with pytest.raises(ParseError) as e:
            load_price_csv(path)
        assert e.value.row == 2
        assert e.value.column == "close"

    def test_bad_date(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("yesterday", 101)])
        with pytest.raises(ParseError) as e:
            load_price_csv(path)
        assert e.value.row == 2
        assert e.value.column == "date"

    def test_missing_file(self, tmp_path):
        with pytest.raises(PriceFileNotFound):
            load_price_csv(tmp_path / "nope.csv")
        with pytest.raises(FileNotFoundError):
            load_price_csv(tmp_path / "nope.csv")

    def test_single_row(self, price_csv):
        path = price_csv([("2020-01-01", 100)])
        with pytest.raises(EmptySeries):
            load_price_csv(path)

    def test_custom_columns(self, price_csv):
        path = price_csv(
            [("02/01/2020", 10.5), ("03/01/2020", 11.0)], header="Day,Adj Close"
        )
        spec = ColumnSpec(date_col="Day", price_col="Adj Close", date_format="%d/%m/%Y")
        series = load_price_csv(path, spec, instrument="BTC")
        assert series.dates == (date(2020, 1, 2), date(2020, 1, 3))
        assert series.instrument == "BTC"

    def test_missing_column(self, price_csv):
        path = price_csv([("2020-01-01", 100), ("2020-01-02", 101)], header="date,price")
        with pytest.raises(ParseError) as e:
            load_price_csv(path)
        assert e.value.column == "close"

    def test_unsorted_rows_are_sorted(self, price_csv):
        path = price_csv([("2020-01-03", 103), ("2020-01-01", 101), ("2020-01-02", 102)])
        series = load_price_csv(path)
        assert series.closes.tolist() == [101.0, 102.0, 103.0]

    def test_sorted_rows_keep_order(self, price_csv):
        rows = [("2020-01-01", 5), ("2020-01-02", 3), ("2020-01-03", 4)]
        series = load_price_csv(price_csv(rows))
        assert series.closes.tolist() == [5.0, 3.0, 4.0]

    def test_canonical_round_trip(self, price_csv, tmp_path):
        rows = [("2020-01-01", 100.123456789012), ("2020-01-02", 0.1), ("2020-01-05", 1e-7)]
        first = load_price_csv(price_csv(rows))
        out_a = write_price_csv(first, tmp_path / "a.csv")
        out_b = write_price_csv(load_price_csv(out_a), tmp_path / "b.csv")
        assert out_a.read_bytes() == out_b.read_bytes()
        assert out_a.read_text().splitlines()[0] == "date,close"

    def test_errors_are_data_errors(self, price_csv):
        path = price_csv([("2020-01-01", -1), ("2020-01-02", 101)])
        with pytest.raises(DataError):
            load_price_csv(path)


class TestPriceSeries:

    def test_invariants(self):
        with pytest.raises(NonPositivePrice):
            PriceSeries("x", _daily(date(2020, 1, 1), 2), np.array([1.0, -1.0]))
        with pytest.raises(DuplicateDate):
            PriceSeries("x", (date(2020, 1, 2), date(2020, 1, 1)), np.array([1.0, 2.0]))

    def test_closes_are_read_only(self):
        series = PriceSeries("x", _daily(date(2020, 1, 1), 3), [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            series.closes[0] = 5.0


class TestValidateSpan:

    def test_covered(self):
        days = _daily(date(2016, 3, 11), (date(2024, 12, 31) - date(2016, 3, 11)).days + 1)
        series = PriceSeries("BTC", days, np.ones(len(days)))
        report = validate_span(series)
        assert report.status == CoverageStatus.covered
        assert report.first == date(2016, 3, 11)
        assert report.last == date(2024, 12, 31)
        assert report.count == len(days)
        assert report.largest_gap.days == 1
        assert report.gaps == ()

    def test_truncated_head(self):
        days = _daily(date(2020, 1, 10), 30)
        series = PriceSeries("x", days, np.ones(30))
        report = validate_span(series, date(2020, 1, 1), days[-1], CalendarKind.seven_day)
        assert report.status == CoverageStatus.truncated_head

    def test_truncated_both(self):
        days = _daily(date(2020, 1, 10), 30)
        series = PriceSeries("x", days, np.ones(30))
        report = validate_span(series, date(2020, 1, 1), date(2021, 1, 1), CalendarKind.seven_day)
        assert report.status == CoverageStatus.truncated_both

    def test_trading_day_weekend_slack(self):
        # Monday 2020-01-06 .. Friday 2020-01-31, weekdays only
        days = tuple(d for d in _daily(date(2020, 1, 6), 26) if d.weekday() < 5)
        series = PriceSeries("x", days, np.ones(len(days)))
        report = validate_span(series, date(2020, 1, 4), date(2020, 2, 2), CalendarKind.trading_day)
        assert report.status == CoverageStatus.covered
        assert report.largest_gap.days == 3
        assert report.gaps == ()

    def test_unregistered_seven_day_series_gets_no_slack(self):
        # starts on Saturday 2020-01-04, three days into the window
        days = _daily(date(2020, 1, 4), 10)
        series = PriceSeries("X", days, np.ones(10))
        report = validate_span(series, date(2020, 1, 1), date(2020, 1, 13))
        assert report.status == CoverageStatus.truncated_head

    def test_unregistered_weekday_series_gets_no_slack(self):
        # Monday 2020-01-06 .. Friday 2020-01-31, weekdays only
        days = tuple(d for d in _daily(date(2020, 1, 6), 26) if d.weekday() < 5)
        series = PriceSeries("X", days, np.ones(len(days)))
        report = validate_span(series, date(2020, 1, 4), date(2020, 1, 31))
        assert report.status == CoverageStatus.truncated_head
        assert report.gaps == ()

    def test_gap_listed(self):
        days = _daily(date(2020, 1, 1), 5) + _daily(date(2020, 1, 20), 5)
        series = PriceSeries("x", days, np.ones(10))
        report = validate_span(series, days[0], days[-1], CalendarKind.seven_day)
        assert report.status == CoverageStatus.covered
        assert len(report.gaps) == 1
        assert report.largest_gap.days == 15
