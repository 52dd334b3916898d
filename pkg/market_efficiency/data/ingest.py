# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import logging
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..datatypes import CalendarKind, ColumnSpec
from ..errors import (
    DuplicateDate,
    EmptySeries,
    NonPositivePrice,
    ParseError,
    PriceFileNotFound,
    UsageError,
)
from ..instruments import resolve_instrument

logger = logging.getLogger(__name__)

CANONICAL_COLUMNS = ("date", "close")


@dataclass(frozen=True)
class RowIssue:
    row: int
    column: str
    reason: str


@dataclass(frozen=True)
class PriceSeries:
    """Date-indexed positive daily closes of one instrument.

    Dates are strictly increasing and every close is > 0; `skipped` lists the
    input rows dropped under `skip_bad_rows`.
    """

    instrument: str
    dates: Tuple[date, ...]
    closes: np.ndarray
    skipped: Tuple[RowIssue, ...] = field(default_factory=tuple)

    def __post_init__(self):
        closes = np.array(self.closes, dtype=float)
        closes.setflags(write=False)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != closes.size:
            raise UsageError("dates and closes differ in length", module="ingest")
        if closes.size < 2:
            raise EmptySeries(
                f"{self.instrument}: a price series needs at least 2 observations, got {closes.size}"
            )
        bad = np.flatnonzero(~(closes > 0) | ~np.isfinite(closes))
        if bad.size:
            raise NonPositivePrice(int(bad[0]) + 1, float(closes[bad[0]]))
        for i in range(1, len(self.dates)):
            if self.dates[i] <= self.dates[i - 1]:
                raise DuplicateDate(i + 1, self.dates[i])

    def __len__(self) -> int:
        return self.closes.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "date": [d.isoformat() for d in self.dates],
                "close": self.closes,
            }
        )


def load_price_csv(
    path: Union[str, Path],
    spec: Optional[ColumnSpec] = None,
    skip_bad_rows: bool = False,
    instrument: Optional[str] = None,
) -> PriceSeries:
    """Load daily closes from a CSV file.

    Row numbers in errors and in `PriceSeries.skipped` count data rows from 1,
    header excluded. Rows with a missing or non-positive close raise unless
    `skip_bad_rows` is set; unparseable dates and duplicate dates always raise.
    """
    spec = spec or ColumnSpec()
    path = Path(path)
    if not path.is_file():
        raise PriceFileNotFound(f"no such price file: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptySeries(f"{path}: file is empty") from None

    for column in (spec.date_col, spec.price_col):
        if column not in raw.columns:
            raise ParseError(0, column, f"column not found; available: {list(raw.columns)}")
    if raw.empty:
        raise EmptySeries(f"{path}: no data rows")

    dates = pd.to_datetime(
        raw[spec.date_col].str.strip(),
        format=spec.date_format or "ISO8601",
        errors="coerce",
    )
    bad_dates = np.flatnonzero(dates.isna().to_numpy())
    if bad_dates.size:
        row = int(bad_dates[0])
        raise ParseError(
            row + 1, spec.date_col, f"cannot parse date {raw[spec.date_col].iloc[row]!r}"
        )

    closes = pd.to_numeric(raw[spec.price_col].str.strip(), errors="coerce").to_numpy(float)
    keep = np.ones(closes.size, dtype=bool)
    skipped: List[RowIssue] = []
    for row in np.flatnonzero(~np.isfinite(closes) | (closes <= 0)):
        value = raw[spec.price_col].iloc[row]
        if np.isfinite(closes[row]):
            issue = RowIssue(int(row) + 1, spec.price_col, f"non-positive close {value!r}")
        else:
            issue = RowIssue(int(row) + 1, spec.price_col, f"missing or invalid close {value!r}")
        if not skip_bad_rows:
            if np.isfinite(closes[row]):
                raise NonPositivePrice(issue.row, float(closes[row]))
            raise ParseError(issue.row, issue.column, issue.reason)
        skipped.append(issue)
        keep[row] = False

    if skipped:
        logger.warning("%s: skipped %d bad rows", path, len(skipped))

    days = [ts.date() for ts in dates[keep]]
    values = closes[keep]
    rows = np.flatnonzero(keep) + 1
    if not days:
        raise EmptySeries(f"{path}: no valid rows remain")

    order = np.argsort(np.array(days, dtype="datetime64[D]"), kind="stable")
    if np.any(order != np.arange(order.size)):
        logger.warning("%s: input rows are not date-sorted; sorting by date", path)
        days = [days[i] for i in order]
        values = values[order]
        rows = rows[order]
    for i in range(1, len(days)):
        if days[i] == days[i - 1]:
            raise DuplicateDate(int(rows[i]), days[i])

    name = instrument or path.stem
    logger.info("loaded %d observations of %s from %s", len(days), name, path)
    return PriceSeries(name, tuple(days), values, tuple(skipped))


def write_price_csv(series: PriceSeries, path: Union[str, Path]) -> Path:
    """Write the canonical `date,close` format (ISO dates, shortest round-trip floats)."""
    path = Path(path)
    series.to_frame().to_csv(path, index=False, lineterminator="\n")
    return path


class CoverageStatus(Enum):
    covered = "covered"
    truncated_head = "truncated-head"
    truncated_tail = "truncated-tail"
    truncated_both = "truncated-both"


@dataclass(frozen=True)
class Gap:
    after: date
    before: date

    @property
    def days(self) -> int:
        return (self.before - self.after).days


@dataclass(frozen=True)
class CoverageReport:
    status: CoverageStatus
    first: date
    last: date
    count: int
    largest_gap: Optional[Gap]
    gaps: Tuple[Gap, ...]


def infer_calendar(dates: Sequence[date]) -> CalendarKind:
    """7-day when any observation falls on a weekend, trading-day otherwise."""
    if any(d.weekday() >= 5 for d in dates):
        return CalendarKind.seven_day
    return CalendarKind.trading_day


def _calendar_gaps(dates: Sequence[date], calendar: CalendarKind) -> List[Gap]:
    # a weekend plus one holiday is ordinary on a trading-day calendar
    allowed = 1 if calendar == CalendarKind.seven_day else 4
    return [
        Gap(a, b) for a, b in zip(dates, dates[1:]) if (b - a).days > allowed
    ]


def validate_span(
    series: PriceSeries,
    expected_start: Optional[date] = None,
    expected_end: Optional[date] = None,
    calendar: Optional[CalendarKind] = None,
) -> CoverageReport:
    """Check that `series` covers the declared analysis window.

    When the dates are omitted they come from the instrument registry. On a
    trading-day calendar, given explicitly or by the registry, the head and
    tail may fall up to 4 days inside the window (weekends and holidays) and
    still count as covered. An inferred calendar gets no slack.
    """
    instrument = resolve_instrument(series.instrument)
    if expected_start is None or expected_end is None:
        if instrument is None:
            raise UsageError(
                f"no expected span given and {series.instrument!r} is not a registered instrument",
                module="ingest",
            )
        expected_start = expected_start or instrument.span_start
        expected_end = expected_end or instrument.span_end
    if expected_start >= expected_end:
        raise UsageError("expected_start must precede expected_end", module="ingest")
    declared = calendar or (instrument.calendar if instrument else None)
    calendar = declared or infer_calendar(series.dates)

    slack = 4 if declared == CalendarKind.trading_day else 0
    first, last = series.dates[0], series.dates[-1]
    head_missing = (first - expected_start).days > slack
    tail_missing = (expected_end - last).days > slack
    if head_missing and tail_missing:
        status = CoverageStatus.truncated_both
    elif head_missing:
        status = CoverageStatus.truncated_head
    elif tail_missing:
        status = CoverageStatus.truncated_tail
    else:
        status = CoverageStatus.covered

    gaps = _calendar_gaps(series.dates, calendar)
    all_steps = [Gap(a, b) for a, b in zip(series.dates, series.dates[1:])]
    largest = max(all_steps, key=lambda g: g.days) if all_steps else None
    return CoverageReport(status, first, last, len(series), largest, tuple(gaps))
