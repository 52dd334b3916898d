# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import logging
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from ..datatypes import SeriesKind
from ..errors import (
    ParseError,
    PriceFileNotFound,
    SeriesTooShort,
    TooFewNonZero,
    TooShort,
    UsageError,
    WrongKind,
)
from .ingest import PriceSeries

logger = logging.getLogger(__name__)

DEFAULT_BLOCKS = 20


@dataclass(frozen=True)
class DerivedSeries:
    """A real-valued series tagged with the transform that produced it.

    `dates` holds one date per value. `dropped_zeros` counts the zero absolute
    returns removed before taking logarithms (volatility increments only).
    """

    kind: SeriesKind
    values: np.ndarray
    source: str
    dates: Tuple[date, ...] = field(default_factory=tuple)
    dropped_zeros: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != values.size:
            raise UsageError(
                f"{self.kind.value}: {values.size} values but {len(self.dates)} dates",
                module="transform",
            )
        if not np.all(np.isfinite(values)):
            raise UsageError(f"{self.kind.value}: non-finite values", module="transform")
        if self.kind == SeriesKind.absolute_returns and np.any(values < 0):
            raise UsageError("absolute returns must be >= 0", module="transform")

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def from_values(
        cls,
        values: Sequence[float],
        kind: SeriesKind = SeriesKind.returns,
        source: str = "synthetic",
        start: date = date(2000, 1, 1),
    ) -> "DerivedSeries":
        """Wrap bare values, dating them one calendar day apart from `start`."""
        n = len(values)
        return cls(kind, np.asarray(values, dtype=float), source, _daily_dates(start, n))

    def slice(self, start: int, stop: int) -> "DerivedSeries":
        return DerivedSeries(
            self.kind, self.values[start:stop], self.source, self.dates[start:stop]
        )

    def between(self, first: date, last: date) -> "DerivedSeries":
        """The observations dated within [first, last]."""
        days = np.array(self.dates, dtype="datetime64[D]")
        lo = int(np.searchsorted(days, np.datetime64(first, "D"), side="left"))
        hi = int(np.searchsorted(days, np.datetime64(last, "D"), side="right"))
        return self.slice(lo, hi)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "date": [d.isoformat() for d in self.dates],
                "value": self.values,
            }
        )


def _daily_dates(start: date, n: int) -> Tuple[date, ...]:
    return tuple(start + timedelta(days=i) for i in range(n))


def log_returns(series: PriceSeries) -> DerivedSeries:
    if len(series) < 2:
        raise SeriesTooShort(f"{series.instrument}: need >= 2 prices for returns")
    values = np.diff(np.log(series.closes))
    return DerivedSeries(SeriesKind.returns, values, series.instrument, series.dates[1:])


def absolute_returns(returns: DerivedSeries) -> DerivedSeries:
    if returns.kind != SeriesKind.returns:
        raise WrongKind(f"expected returns, got {returns.kind.value}")
    if len(returns) == 0:
        raise SeriesTooShort(f"{returns.source}: empty returns series")
    return DerivedSeries(
        SeriesKind.absolute_returns, np.abs(returns.values), returns.source, returns.dates
    )


def volatility_increments(abs_returns: DerivedSeries) -> DerivedSeries:
    """Log-differences of absolute returns after removing zero returns."""
    if abs_returns.kind != SeriesKind.absolute_returns:
        raise WrongKind(f"expected absolute returns, got {abs_returns.kind.value}")
    nonzero = np.flatnonzero(abs_returns.values > 0)
    dropped = len(abs_returns) - nonzero.size
    if nonzero.size < 2:
        raise TooFewNonZero(
            f"{abs_returns.source}: {nonzero.size} nonzero absolute returns, need >= 2"
        )
    if dropped:
        logger.info("%s: dropped %d zero absolute returns", abs_returns.source, dropped)
    values = np.diff(np.log(abs_returns.values[nonzero]))
    dates = tuple(abs_returns.dates[i] for i in nonzero[1:])
    return DerivedSeries(
        SeriesKind.volatility_increments, values, abs_returns.source, dates, dropped
    )


def derive_all(series: PriceSeries) -> Tuple[DerivedSeries, DerivedSeries, DerivedSeries]:
    r = log_returns(series)
    ar = absolute_returns(r)
    return r, ar, volatility_increments(ar)


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float


@dataclass(frozen=True)
class StatsReport:
    """Point estimates over the full series, errors from the block jackknife.

    Kurtosis is raw (Gaussian = 3). For a constant series variance is 0 and
    kurtosis/skewness are NaN with their `*_defined` flag cleared.
    """

    mean: Estimate
    variance: Estimate
    kurtosis: Estimate
    skewness: Estimate
    block_count: int
    count: int

    @property
    def kurtosis_defined(self) -> bool:
        return bool(np.isfinite(self.kurtosis.value))

    @property
    def skewness_defined(self) -> bool:
        return bool(np.isfinite(self.skewness.value))

    def rows(self):
        for name in ("mean", "variance", "kurtosis", "skewness"):
            est = getattr(self, name)
            yield name, est.value, est.error


def _moments(x: np.ndarray) -> np.ndarray:
    mean = float(np.mean(x))
    if np.ptp(x) == 0.0:
        return np.array([mean, 0.0, np.nan, np.nan])
    return np.array(
        [
            mean,
            float(np.var(x, ddof=1)),
            float(stats.kurtosis(x, fisher=False, bias=True)),
            float(stats.skew(x, bias=True)),
        ]
    )


def block_bounds(n: int, blocks: int) -> np.ndarray:
    """Start offsets of `blocks` contiguous blocks plus the end `n`.

    Blocks have n // blocks observations; the remainder joins the last block.
    """
    size = n // blocks
    bounds = np.arange(blocks + 1) * size
    bounds[-1] = n
    return bounds


def block_jackknife(
    values: np.ndarray,
    statistic: Callable[[np.ndarray], np.ndarray],
    blocks: int = DEFAULT_BLOCKS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Delete-one-block jackknife.

    Returns the statistic over the full sample and its jackknife standard
    error sqrt((B - 1) / B * sum_i (theta_i - theta_bar)^2).
    """
    full = np.atleast_1d(statistic(values))
    bounds = block_bounds(values.size, blocks)
    replicas = np.array(
        [
            statistic(np.concatenate([values[: bounds[i]], values[bounds[i + 1] :]]))
            for i in range(blocks)
        ]
    )
    spread = replicas - replicas.mean(axis=0)
    errors = np.sqrt((blocks - 1) / blocks * np.sum(spread**2, axis=0))
    return full, errors


def descriptive_stats(series: DerivedSeries, blocks: int = DEFAULT_BLOCKS) -> StatsReport:
    if blocks < 2:
        raise UsageError(f"blocks must be >= 2, got {blocks}", module="transform")
    n = len(series)
    if n < 2 * blocks:
        raise TooShort(f"{series.kind.value}: {n} values is too short for {blocks} blocks")

    full, errors = block_jackknife(series.values, _moments, blocks)
    if full[1] == 0.0:
        logger.warning(
            "%s %s: zero variance; kurtosis and skewness are undefined",
            series.source,
            series.kind.value,
        )
    mean, variance, kurtosis, skewness = (Estimate(float(v), float(e)) for v, e in zip(full, errors))
    return StatsReport(mean, variance, kurtosis, skewness, blocks, n)


def stats_frame(reports: Sequence[Tuple[SeriesKind, StatsReport]]) -> pd.DataFrame:
    """Long-form table: one row per (series kind, statistic)."""
    records = []
    for kind, report in reports:
        for name, value, error in report.rows():
            records.append(
                {"kind": kind.value, "statistic": name, "value": value, "error": error}
            )
        records.append(
            {
                "kind": kind.value,
                "statistic": "block_count",
                "value": float(report.block_count),
                "error": 0.0,
            }
        )
    return pd.DataFrame.from_records(records, columns=["kind", "statistic", "value", "error"])


def write_series_csv(
    series: DerivedSeries, path: Union[str, Path], header: Sequence[str] = ()
) -> Path:
    """`date,value` CSV; `header` lines are written first as `# ` comments."""
    path = Path(path)
    with open(path, "w", newline="") as f:
        for line in header:
            f.write(f"# {line}\n")
        series.to_frame().to_csv(f, index=False, lineterminator="\n")
    return path


def read_series_csv(
    path: Union[str, Path], kind: SeriesKind = SeriesKind.returns, source: Optional[str] = None
) -> DerivedSeries:
    """Read a `date,value` (or bare `value`) series written by `write_series_csv`."""
    path = Path(path)
    if not path.is_file():
        raise PriceFileNotFound(f"no such series file: {path}")
    frame = pd.read_csv(path, comment="#")
    if "value" not in frame.columns:
        raise ParseError(0, "value", f"column not found; available: {list(frame.columns)}")
    values = pd.to_numeric(frame["value"], errors="coerce").to_numpy(float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ParseError(int(bad[0]) + 1, "value", "not a finite number")
    source = source or path.stem
    if "date" not in frame.columns:
        return DerivedSeries.from_values(values, kind, source)
    dates = pd.to_datetime(frame["date"], format="ISO8601", errors="coerce")
    bad = np.flatnonzero(dates.isna().to_numpy())
    if bad.size:
        raise ParseError(int(bad[0]) + 1, "date", f"not an ISO date: {frame['date'].iloc[bad[0]]!r}")
    return DerivedSeries(kind, values, source, tuple(dates.dt.date))
