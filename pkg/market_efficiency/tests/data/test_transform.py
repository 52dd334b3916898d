# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from market_efficiency.data.ingest import PriceSeries
from market_efficiency.data.transform import (
    absolute_returns,
    block_bounds,
    block_jackknife,
    derive_all,
    DerivedSeries,
    descriptive_stats,
    log_returns,
    read_series_csv,
    stats_frame,
    volatility_increments,
    write_series_csv,
)
from market_efficiency.datatypes import SeriesKind
from market_efficiency.errors import ParseError, TooFewNonZero, TooShort, UsageError, WrongKind


def _prices(closes):
    days = tuple(date.fromordinal(date(2020, 1, 1).toordinal() + i) for i in range(len(closes)))
    return PriceSeries("test", days, np.asarray(closes, dtype=float))


class TestTransforms:

    def test_log_returns(self):
        r = log_returns(_prices([100, 110, 99]))
        assert r.kind == SeriesKind.returns
        assert len(r) == 2
        assert r.values[0] == pytest.approx(math.log(1.1))
        assert r.values[1] == pytest.approx(math.log(0.9))
        assert r.dates == (date(2020, 1, 2), date(2020, 1, 3))

    def test_absolute_returns(self):
        ar = absolute_returns(log_returns(_prices([100, 110, 99])))
        assert ar.kind == SeriesKind.absolute_returns
        assert np.all(ar.values >= 0)
        assert ar.values[1] == pytest.approx(-math.log(0.9))

    def test_absolute_returns_wrong_kind(self):
        ar = absolute_returns(log_returns(_prices([100, 110, 99])))
        with pytest.raises(WrongKind):
            absolute_returns(ar)

    def test_volatility_increments(self):
        r = DerivedSeries.from_values([0.01, -0.02, 0.04])
        vi = volatility_increments(absolute_returns(r))
        assert vi.values.tolist() == pytest.approx([math.log(2.0), math.log(2.0)])
        assert vi.dropped_zeros == 0

    def test_volatility_increments_drop_zeros(self):
        r = DerivedSeries.from_values([0.01, 0.0, -0.02, 0.0, 0.04])
        vi = volatility_increments(absolute_returns(r))
        assert len(vi) == 2
        assert vi.dropped_zeros == 2
        assert vi.values.tolist() == pytest.approx([math.log(2.0), math.log(2.0)])
        # labeled by the later of the two nonzero returns
        assert vi.dates == (r.dates[2], r.dates[4])

    def test_volatility_increments_too_few(self):
        r = DerivedSeries.from_values([0.0, 0.0, 0.01, 0.0])
        with pytest.raises(TooFewNonZero):
            volatility_increments(absolute_returns(r))

    def test_volatility_increments_wrong_kind(self):
        with pytest.raises(WrongKind):
            volatility_increments(DerivedSeries.from_values([0.1, 0.2, 0.3]))

    def test_derive_all(self):
        r, ar, vi = derive_all(_prices([100, 101, 100, 102, 99]))
        assert [s.kind for s in (r, ar, vi)] == list(SeriesKind)
        assert len(r) == len(ar) == 4
        assert len(vi) == 3

    def test_non_finite_rejected(self):
        with pytest.raises(UsageError):
            DerivedSeries.from_values([0.1, float("nan")])

    def test_between(self):
        s = DerivedSeries.from_values(np.arange(10.0), start=date(2020, 1, 1))
        part = s.between(date(2020, 1, 3), date(2020, 1, 5))
        assert part.values.tolist() == [2.0, 3.0, 4.0]

    def test_series_csv(self, tmp_path):
        s = DerivedSeries.from_values([0.5, -0.25, 1e-9], start=date(2021, 6, 1))
        path = write_series_csv(s, tmp_path / "s.csv", header=["rng=test seed=1"])
        assert path.read_text().startswith("# rng=test seed=1\ndate,value\n")
        back = read_series_csv(path)
        assert back.values.tolist() == s.values.tolist()
        assert back.dates == s.dates
        assert back.source == "s"

    def test_series_csv_bad_date(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("date,value\n2021-06-01,0.5\nyesterday,0.25\n")
        with pytest.raises(ParseError) as info:
            read_series_csv(path)
        assert (info.value.row, info.value.column) == (2, "date")

    def test_volatility_increments_telescope(self):
        # the mean log-difference only depends on the first and last nonzero values
        x = np.random.default_rng(5).standard_normal(500)
        x[::7] = 0.0
        ar = absolute_returns(DerivedSeries.from_values(x))
        vi = volatility_increments(ar)
        nonzero = ar.values[ar.values > 0]
        expected = (math.log(nonzero[-1]) - math.log(nonzero[0])) / len(vi)
        assert vi.values.mean() == pytest.approx(expected, rel=1e-9, abs=1e-12)


class TestBlockJackknife:

    def test_block_bounds(self):
        bounds = block_bounds(103, 10)
        assert bounds[0] == 0
        assert bounds[-1] == 103
        assert np.all(np.diff(bounds)[:-1] == 10)
        assert np.diff(bounds)[-1] == 13

    def test_mean_error_matches_closed_form(self):
        # for the mean, the delete-one jackknife with n blocks of size 1 is the standard error
        x = np.random.default_rng(1).standard_normal(40)
        full, err = block_jackknife(x, lambda v: np.array([v.mean()]), blocks=40)
        assert full[0] == pytest.approx(x.mean())
        assert err[0] == pytest.approx(x.std(ddof=1) / math.sqrt(x.size))

    def test_constant_statistic_has_zero_error(self):
        x = np.arange(100.0)
        _, err = block_jackknife(x, lambda v: np.array([1.0]), blocks=20)
        assert err[0] == 0.0


class TestDescriptiveStats:

    def test_gaussian(self):
        x = np.random.default_rng(7).standard_normal(20000)
        report = descriptive_stats(DerivedSeries.from_values(x))
        assert report.block_count == 20
        assert report.count == 20000
        assert abs(report.mean.value) < 4 / math.sqrt(x.size)
        assert report.variance.value == pytest.approx(1.0, abs=0.05)
        assert report.kurtosis.value == pytest.approx(3.0, abs=0.15)
        assert abs(report.skewness.value) < 0.1
        assert report.mean.error > 0

    def test_constant_series(self):
        report = descriptive_stats(DerivedSeries.from_values(np.full(100, 0.5)))
        assert report.variance.value == 0.0
        assert not report.kurtosis_defined
        assert not report.skewness_defined
        assert math.isnan(report.kurtosis.value)

    def test_too_short(self):
        with pytest.raises(TooShort):
            descriptive_stats(DerivedSeries.from_values(np.arange(39.0)), blocks=20)

    def test_blocks_must_be_at_least_two(self):
        with pytest.raises(UsageError):
            descriptive_stats(DerivedSeries.from_values(np.arange(100.0)), blocks=1)

    def test_block_permutation_keeps_point_estimates(self):
        x = np.random.default_rng(11).standard_normal(400)
        blocks = x.reshape(20, 20)
        permuted = blocks[np.random.default_rng(12).permutation(20)].ravel()
        a = descriptive_stats(DerivedSeries.from_values(x))
        b = descriptive_stats(DerivedSeries.from_values(permuted))
        for name in ("mean", "variance", "kurtosis", "skewness"):
            assert getattr(b, name).value == pytest.approx(getattr(a, name).value, rel=1e-9, abs=1e-12)

    def test_stats_frame_layout(self):
        x = np.random.default_rng(3).standard_normal(200)
        report = descriptive_stats(DerivedSeries.from_values(x))
        frame = stats_frame([(SeriesKind.returns, report)])
        assert list(frame.columns) == ["kind", "statistic", "value", "error"]
        assert frame["statistic"].tolist() == [
            "mean",
            "variance",
            "kurtosis",
            "skewness",
            "block_count",
        ]
        assert set(frame["kind"]) == {"returns"}

    @pytest.mark.property
    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.integers(min_value=-1000, max_value=1000), min_size=40, max_size=200)
    )
    def test_kurtosis_bound(self, values):
        # raw kurtosis is bounded below by 1 + skewness^2
        report = descriptive_stats(DerivedSeries.from_values(values))
        if report.kurtosis_defined:
            assert report.kurtosis.value >= 1.0 + report.skewness.value**2 - 1e-6
