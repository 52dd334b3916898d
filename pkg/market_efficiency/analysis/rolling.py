# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""Rolling-window evolution of h(2) and the multifractal strength measures.

Every window is labeled by the date of its last observation. Windows are
independent MFDFA evaluations, so they may be scheduled on any number of
worker threads; results are assembled in window order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..data.ingest import infer_calendar
from ..data.transform import DerivedSeries
from ..datatypes import (
    CalendarKind,
    EventSet,
    MfdfaConfig,
    Period,
    Quality,
    RollingConfig,
    SeriesKind,
)
from ..errors import (
    NumericalError,
    PeriodOutsideData,
    PeriodTooShort,
    QNotOnGrid,
    ScaleTooLarge,
    SeriesTooShort,
    WindowTooLarge,
)
from ..instruments import before_and_during_pandemic
from .hurstscale import apply_correction
from .mfdfa import GheCurve, mfdfa
from .spectrum import DEFAULT_ORDER, delta_alpha, delta_h, mdm, singularity_spectrum

logger = logging.getLogger(__name__)

STRENGTH_ORDERS = (1.0, 2.0, 3.0, 4.0, 5.0)
BASELINE = "baseline"

ROLLING_COLUMNS = ["end_date", "h2", "h2_err", "dh5", "da5", "mdm5", "quality"]
EXTRA_COLUMNS = ["dh1", "dh2", "dh3", "dh4"]


@dataclass(frozen=True)
class WindowSummary:
    index: int
    end_date: date
    h2: float
    h2_err: float
    # delta_h at orders 1..5; NaN where an order is not on the q-grid
    delta_h: Tuple[float, ...]
    da5: float
    mdm5: float
    quality: Quality
    h2_corrected: Optional[float] = None

    @property
    def dh5(self) -> float:
        return self.delta_h[-1]


@dataclass(frozen=True)
class RollingResult:
    source: str
    kind: SeriesKind
    window: int
    step: int
    calendar: CalendarKind
    rows: Tuple[WindowSummary, ...]
    config: RollingConfig
    scales: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    @property
    def count(self) -> int:
        return len(self.rows)

    @property
    def end_dates(self) -> List[date]:
        return [r.end_date for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for r in self.rows:
            record = {
                "end_date": r.end_date.isoformat(),
                "h2": r.h2,
                "h2_err": r.h2_err,
                "dh5": r.dh5,
                "da5": r.da5,
                "mdm5": r.mdm5,
                "quality": r.quality.value,
            }
            for order, value in zip(STRENGTH_ORDERS[:-1], r.delta_h[:-1]):
                record[f"dh{int(order)}"] = value
            if self.config.correction_a1 is not None:
                record["h2_corrected"] = r.h2_corrected
            records.append(record)
        columns = ROLLING_COLUMNS + EXTRA_COLUMNS
        if self.config.correction_a1 is not None:
            columns = columns + ["h2_corrected"]
        return pd.DataFrame.from_records(records, columns=columns)


def _strength(curve: GheCurve, q: float, measure) -> float:
    try:
        return measure(curve, q)
    except QNotOnGrid:
        return float("nan")


def summarize_window(
    curve: GheCurve, index: int, end_date: date, correction_a1: Optional[float] = None
) -> WindowSummary:
    alpha = singularity_spectrum(curve)
    dh = tuple(_strength(curve, q, delta_h) for q in STRENGTH_ORDERS)
    try:
        da5 = delta_alpha(alpha, DEFAULT_ORDER)
        mdm5 = mdm(curve, DEFAULT_ORDER).value
    except QNotOnGrid:
        da5 = mdm5 = float("nan")
    h2 = curve.h2
    corrected = None
    if correction_a1 is not None:
        corrected = apply_correction(h2, n=1, a1=correction_a1)
    return WindowSummary(
        index=index,
        end_date=end_date,
        h2=h2,
        h2_err=curve.h2_stderr,
        delta_h=dh,
        da5=da5,
        mdm5=mdm5,
        quality=curve.quality,
        h2_corrected=corrected,
    )


def _failed_window(index: int, end_date: date, error: Exception) -> WindowSummary:
    logger.warning("window %d ending %s failed: %s", index, end_date, error)
    nan = float("nan")
    return WindowSummary(
        index=index,
        end_date=end_date,
        h2=nan,
        h2_err=nan,
        delta_h=tuple(nan for _ in STRENGTH_ORDERS),
        da5=nan,
        mdm5=nan,
        quality=Quality.suspect,
    )


def window_count(n: int, window: int, step: int) -> int:
    return (n - window) // step + 1


def rolling_ghe(
    series: DerivedSeries,
    config: Optional[RollingConfig] = None,
    calendar: Optional[CalendarKind] = None,
) -> RollingResult:
    """h(2), delta_h, delta_alpha(5) and MDM(5) on every window position.

    Windows count observations. The window length defaults per calendar kind,
    inferred from the dates when not given.
    """
    config = config or RollingConfig()
    calendar = calendar or infer_calendar(series.dates)
    window = config.resolve_window(calendar)
    n = len(series)
    if window > n:
        raise WindowTooLarge(f"{series.source}: window {window} exceeds series length {n}")
    try:
        scales = config.mfdfa.resolve_scales(window)
    except (ScaleTooLarge, SeriesTooShort) as e:
        raise WindowTooLarge(f"window {window} is too short for the scale grid: {e}") from e

    starts = [i * config.step for i in range(window_count(n, window, config.step))]
    values = series.values
    dates = series.dates

    def evaluate(i_start: Tuple[int, int]) -> WindowSummary:
        index, start = i_start
        stop = start + window
        end_date = dates[stop - 1]
        try:
            curve = mfdfa(values[start:stop], config.mfdfa)
        except (NumericalError, SeriesTooShort) as e:
            return _failed_window(index, end_date, e)
        logger.debug("window %d ending %s: h2=%.4f", index, end_date, curve.h2)
        return summarize_window(curve, index, end_date, config.correction_a1)

    jobs = list(enumerate(starts))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as executor:
            rows = list(executor.map(evaluate, jobs))
    else:
        rows = [evaluate(job) for job in jobs]

    suspect = sum(1 for r in rows if r.quality == Quality.suspect)
    logger.info(
        "%s %s: %d windows of %d observations (%d suspect)",
        series.source,
        series.kind.value,
        len(rows),
        window,
        suspect,
    )
    return RollingResult(
        source=series.source,
        kind=series.kind,
        window=window,
        step=config.step,
        calendar=calendar,
        rows=tuple(rows),
        config=config,
        scales=scales,
    )


def default_study_windows(calendar: CalendarKind) -> List[int]:
    # 1.5, 2, 3, 4 and 5 years of observations
    if calendar == CalendarKind.seven_day:
        return [547, 730, 1095, 1460, 1825]
    return [375, 500, 750, 1000, 1250]


@dataclass(frozen=True)
class WindowStudy:
    results: Tuple[RollingResult, ...]

    @property
    def windows(self) -> List[int]:
        return [r.window for r in self.results]

    @property
    def h2_std(self) -> List[float]:
        return [float(np.nanstd(r.column("h2"))) for r in self.results]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "window": self.windows,
                "count": [r.count for r in self.results],
                "h2_mean": [float(np.nanmean(r.column("h2"))) for r in self.results],
                "h2_std": self.h2_std,
            }
        )


def window_study(
    series: DerivedSeries,
    windows: Optional[Sequence[int]] = None,
    config: Optional[RollingConfig] = None,
    calendar: Optional[CalendarKind] = None,
) -> WindowStudy:
    """Rolling h(2) at several window sizes; smaller windows fluctuate more."""
    config = config or RollingConfig()
    calendar = calendar or infer_calendar(series.dates)
    windows = sorted(windows or default_study_windows(calendar))
    results = tuple(
        rolling_ghe(series, config.model_copy(update={"window": w}), calendar) for w in windows
    )
    return WindowStudy(results)


@dataclass(frozen=True)
class PeriodSummary:
    name: str
    start: date
    end: date
    first: date
    last: date
    count: int
    curve: GheCurve

    @property
    def h2(self) -> float:
        return self.curve.h2

    @property
    def h2_err(self) -> float:
        return self.curve.h2_stderr


def _min_period_length(config: MfdfaConfig) -> int:
    smallest = config.scales[0] if config.scales else config.s_min
    return 4 * smallest


def period_summary(
    series: DerivedSeries,
    periods: Optional[Sequence[Period]] = None,
    mfdfa_config: Optional[MfdfaConfig] = None,
) -> List[PeriodSummary]:
    """Whole-period MFDFA of each named period (inclusive date bounds)."""
    config = mfdfa_config or MfdfaConfig()
    periods = list(periods) if periods is not None else before_and_during_pandemic()
    first_day, last_day = series.dates[0], series.dates[-1]

    summaries = []
    for period in periods:
        if period.end < first_day or period.start > last_day:
            raise PeriodOutsideData(
                f"period {period.name!r} ({period.start}..{period.end}) lies outside the data "
                f"({first_day}..{last_day})"
            )
        if period.start < first_day or period.end > last_day:
            logger.warning("period %r is only partially covered by the data", period.name)
        part = series.between(period.start, period.end)
        needed = _min_period_length(config)
        if len(part) < needed:
            raise PeriodTooShort(
                f"period {period.name!r} has {len(part)} observations, need >= {needed}"
            )
        try:
            curve = mfdfa(part, config)
        except (ScaleTooLarge, SeriesTooShort) as e:
            raise PeriodTooShort(f"period {period.name!r}: {e}") from e
        logger.info("period %s: h2=%.4f over %d observations", period.name, curve.h2, len(part))
        summaries.append(
            PeriodSummary(
                name=period.name,
                start=period.start,
                end=period.end,
                first=part.dates[0],
                last=part.dates[-1],
                count=len(part),
                curve=curve,
            )
        )
    return summaries


def periods_frame(summaries: Sequence[PeriodSummary]) -> pd.DataFrame:
    return pd.DataFrame.from_records(
        [
            {
                "period": s.name,
                "start": s.start.isoformat(),
                "end": s.end.isoformat(),
                "first": s.first.isoformat(),
                "last": s.last.isoformat(),
                "count": s.count,
                "h2": s.h2,
                "h2_err": s.h2_err,
                "quality": s.curve.quality.value,
            }
            for s in summaries
        ],
        columns=["period", "start", "end", "first", "last", "count", "h2", "h2_err", "quality"],
    )


@dataclass(frozen=True)
class Segment:
    label: str
    start: date
    end: date
    rows: int
    mean_h2: float
    mean_dh5: float


@dataclass(frozen=True)
class AnnotatedRolling:
    result: RollingResult
    # per row: name of the most recent event on or before the window end date
    labels: Tuple[str, ...]
    segments: Tuple[Segment, ...]

    def to_frame(self) -> pd.DataFrame:
        frame = self.result.to_frame()
        frame.insert(len(ROLLING_COLUMNS), "segment", list(self.labels))
        return frame

    def segments_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(
            [
                {
                    "segment": s.label,
                    "start": s.start.isoformat(),
                    "end": s.end.isoformat(),
                    "rows": s.rows,
                    "mean_h2": s.mean_h2,
                    "mean_dh5": s.mean_dh5,
                }
                for s in self.segments
            ],
            columns=["segment", "start", "end", "rows", "mean_h2", "mean_dh5"],
        )


def _nanmean(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return float(finite.mean()) if finite.size else float("nan")


def annotate_events(result: RollingResult, events: Optional[EventSet] = None) -> AnnotatedRolling:
    """Label each row with the most recent event; rows before the first event are `baseline`."""
    events = events if events is not None else EventSet()
    event_days = np.array([e.date for e in events.events], dtype="datetime64[D]")
    names = [e.name for e in events.events]
    end_days = np.array(result.end_dates, dtype="datetime64[D]")

    positions = np.searchsorted(event_days, end_days, side="right") - 1
    labels = tuple(BASELINE if p < 0 else names[p] for p in positions)

    h2 = result.column("h2")
    dh5 = result.column("dh5")
    segments: List[Segment] = []
    begin = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[begin]:
            segments.append(
                Segment(
                    label=labels[begin],
                    start=result.rows[begin].end_date,
                    end=result.rows[i - 1].end_date,
                    rows=i - begin,
                    mean_h2=_nanmean(h2[begin:i]),
                    mean_dh5=_nanmean(dh5[begin:i]),
                )
            )
            begin = i
    return AnnotatedRolling(result, labels, tuple(segments))


def strength_correlation(result: RollingResult) -> float:
    """Pearson correlation of the delta_h(5) and delta_alpha(5) paths."""
    dh5, da5 = result.column("dh5"), result.column("da5")
    keep = np.isfinite(dh5) & np.isfinite(da5)
    if np.count_nonzero(keep) < 2 or np.ptp(dh5[keep]) == 0 or np.ptp(da5[keep]) == 0:
        return float("nan")
    return float(np.corrcoef(dh5[keep], da5[keep])[0, 1])


def rolling_summary(result: RollingResult) -> Dict[str, float]:
    h2 = result.column("h2")
    return {
        "windows": float(result.count),
        "h2_mean": _nanmean(h2),
        "h2_std": float(np.nanstd(h2)) if np.isfinite(h2).any() else float("nan"),
        "strength_correlation": strength_correlation(result),
    }
