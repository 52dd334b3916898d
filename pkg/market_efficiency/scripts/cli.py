# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import fire
import pandas as pd
import yaml
from pydantic import ValidationError
from termcolor import cprint

from market_efficiency.analysis.hurstscale import (
    DEFAULT_A1,
    apply_correction,
    fit_scaling,
    read_points_csv,
)
from market_efficiency.analysis.mfdfa import GheCurve, mfdfa
from market_efficiency.analysis.rolling import (
    annotate_events,
    period_summary,
    periods_frame,
    rolling_ghe,
    strength_correlation,
    window_study,
)
from market_efficiency.analysis.spectrum import (
    singularity_spectrum,
    spectrum_frame,
    strength_frame,
)
from market_efficiency.analysis.synth import RNG_ALGORITHM, generate, rng_identity, shuffle
from market_efficiency.data.ingest import load_price_csv, validate_span, write_price_csv
from market_efficiency.data.transform import (
    derive_all,
    descriptive_stats,
    read_series_csv,
    stats_frame,
    write_series_csv,
)
from market_efficiency.datatypes import (
    CalendarKind,
    ColumnSpec,
    Event,
    EventSet,
    MfdfaConfig,
    Period,
    RollingConfig,
    SeriesKind,
    SynthKind,
    SynthSpec,
)
from market_efficiency.errors import ConfigError, EfficiencyError, UsageError
from market_efficiency.instruments import resolve_instrument
from market_efficiency.pipeline import load_config, run_pipeline, write_frame
from market_efficiency.schema_utils import registered_schemas

logger = logging.getLogger(__name__)


def _csv_list(value, cast=float) -> Optional[List[Any]]:
    # fire hands over "1,2,3" as a tuple and "1" as a scalar
    if value is None:
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    elif not isinstance(value, (list, tuple)):
        value = [value]
    return [cast(v) for v in value]


def _enum(enum_type, value):
    try:
        return enum_type(value)
    except ValueError:
        choices = ", ".join(m.value for m in enum_type)
        raise UsageError(f"{value!r} is not one of: {choices}", module="cli") from None


def read_events_csv(path) -> EventSet:
    """`name,date` rows; an empty file yields an empty event set."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such events file: {path}")
    frame = pd.read_csv(path, dtype=str)
    missing = {"name", "date"} - set(frame.columns)
    if missing:
        raise ConfigError(f"{path}: missing columns {sorted(missing)}")
    return EventSet(
        events=[Event(name=row["name"], date=row["date"]) for row in frame.to_dict("records")]
    )


class MarketEfficiencyCLI:
    """Multifractal market-efficiency toolkit.

    Global flags: --config (YAML), --out_dir, --threads, --seed, --verbose.
    """

    def __init__(
        self,
        config: Optional[str] = None,
        out_dir: Optional[str] = None,
        threads: Optional[int] = None,
        seed: Optional[int] = None,
        verbose: bool = False,
    ):
        logging.basicConfig(
            level=logging.DEBUG if verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
        self._config_path = config
        # None: keep the config-file value (or the default)
        self._out_dir_flag = out_dir
        self._out_dir = Path(out_dir or "out")
        self._threads_flag = threads
        self._seed_flag = seed
        self._seed = seed or 0

    def _file_section(self, name: str) -> Dict[str, Any]:
        if self._config_path is None:
            return {}
        path = Path(self._config_path)
        if not path.is_file():
            raise ConfigError(f"no such config file: {path}")
        data = yaml.safe_load(path.read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: the top level must be a mapping")
        return data.get(name) or {}

    def _output(self, name: str) -> Path:
        self._out_dir.mkdir(parents=True, exist_ok=True)
        return self._out_dir / name

    def _wrote(self, path: Path) -> None:
        cprint(f"wrote {path}", "green")

    def _mfdfa_config(
        self,
        q_min: Optional[float] = None,
        q_max: Optional[float] = None,
        q_step: Optional[float] = None,
        s_min: Optional[int] = None,
        s_max: Optional[int] = None,
        n_scales: Optional[int] = None,
        detrend_order: Optional[int] = None,
        scales=None,
    ) -> MfdfaConfig:
        base = MfdfaConfig(**self._file_section("mfdfa"))
        updates: Dict[str, Any] = {
            key: value
            for key, value in (
                ("s_min", s_min),
                ("s_max", s_max),
                ("n_scales", n_scales),
                ("detrend_order", detrend_order),
                ("scales", _csv_list(scales, int)),
            )
            if value is not None
        }
        if q_min is not None or q_max is not None or q_step is not None:
            grid = MfdfaConfig.from_range(
                q_min if q_min is not None else base.q_grid[0],
                q_max if q_max is not None else base.q_grid[-1],
                q_step if q_step is not None else base.q_step,
            )
            updates["q_grid"] = grid.q_grid
        # re-validate: model_copy alone skips the validators
        return MfdfaConfig(**{**base.model_dump(), **updates})

    def _prices(self, path, date_col, price_col, date_format, skip_bad_rows, instrument):
        spec = ColumnSpec(date_col=date_col, price_col=price_col, date_format=date_format)
        return load_price_csv(path, spec, skip_bad_rows=skip_bad_rows, instrument=instrument)

    def ingest(
        self,
        path: str,
        date_col: str = "date",
        price_col: str = "close",
        date_format: Optional[str] = None,
        skip_bad_rows: bool = False,
        instrument: Optional[str] = None,
    ):
        """Load a price CSV; write the canonical prices and the three derived series."""
        prices = self._prices(path, date_col, price_col, date_format, skip_bad_rows, instrument)
        if prices.skipped:
            cprint(f"skipped {len(prices.skipped)} rows", "yellow")
            for issue in prices.skipped:
                cprint(f"  row {issue.row} [{issue.column}]: {issue.reason}", "yellow")
        self._wrote(write_price_csv(prices, self._output("prices.csv")))
        for series in derive_all(prices):
            self._wrote(write_series_csv(series, self._output(f"{series.kind.value}.csv")))
            if series.dropped_zeros:
                cprint(f"{series.kind.value}: dropped {series.dropped_zeros} zero returns", "yellow")

        if resolve_instrument(prices.instrument) is not None:
            report = validate_span(prices)
            cprint(
                f"coverage {report.status.value}: {report.first} .. {report.last}, "
                f"{report.count} observations",
                "cyan",
            )
            if report.largest_gap is not None:
                cprint(
                    f"largest gap {report.largest_gap.days} days after {report.largest_gap.after}",
                    "cyan",
                )

    def stats(
        self,
        path: str,
        blocks: int = 20,
        date_col: str = "date",
        price_col: str = "close",
        date_format: Optional[str] = None,
        skip_bad_rows: bool = False,
    ):
        """Descriptive statistics of returns, absolute returns and volatility increments."""
        prices = self._prices(path, date_col, price_col, date_format, skip_bad_rows, None)
        reports = [(s.kind, descriptive_stats(s, blocks)) for s in derive_all(prices)]
        self._wrote(write_frame(stats_frame(reports), self._output("stats.csv")))

    def mfdfa(
        self,
        path: str,
        kind: str = "returns",
        q_min: Optional[float] = None,
        q_max: Optional[float] = None,
        q_step: Optional[float] = None,
        s_min: Optional[int] = None,
        s_max: Optional[int] = None,
        n_scales: Optional[int] = None,
        detrend_order: Optional[int] = None,
        scales=None,
        fluctuation: bool = False,
    ):
        """Generalized Hurst exponents h(q) of a `date,value` series CSV."""
        config = self._mfdfa_config(q_min, q_max, q_step, s_min, s_max, n_scales, detrend_order, scales)
        series = read_series_csv(path, _enum(SeriesKind, kind))
        curve = mfdfa(series, config)
        self._wrote(write_frame(curve.to_frame(), self._output("ghe.csv")))
        if fluctuation:
            self._wrote(write_frame(curve.surface.to_frame(), self._output("fluctuation.csv")))
        cprint(f"h(2) = {curve.h2:.4f} +- {curve.h2_stderr:.4f} ({curve.quality.value})", "cyan")

    def spectrum(self, path: str = "ghe.csv"):
        """Singularity spectrum and strength measures from a `q,h` table."""
        if not Path(path).is_file():
            raise UsageError(f"no such GHE table: {path}", module="spectrum")
        curve = GheCurve.from_frame(pd.read_csv(path))
        alpha = singularity_spectrum(curve)
        self._wrote(write_frame(spectrum_frame(curve, alpha), self._output("alpha.csv")))
        self._wrote(write_frame(strength_frame(curve, alpha), self._output("strength.csv")))
        cprint(f"spectrum width {alpha.width:.4f}", "cyan")

    def roll(
        self,
        path: str,
        kind: str = "returns",
        window: Optional[int] = None,
        step: Optional[int] = None,
        events: Optional[str] = None,
        windows=None,
        calendar: Optional[str] = None,
        correction_a1: Optional[float] = None,
        s_min: Optional[int] = None,
        n_scales: Optional[int] = None,
        detrend_order: Optional[int] = None,
    ):
        """Rolling-window h(2), delta_h(5), delta_alpha(5) and MDM(5) of a series CSV."""
        series = read_series_csv(path, _enum(SeriesKind, kind))
        file_rolling = self._file_section("rolling")
        file_rolling.pop("mfdfa", None)
        overrides = {
            key: value
            for key, value in (
                ("window", window),
                ("step", step),
                ("correction_a1", correction_a1),
                ("threads", self._threads_flag),
            )
            if value is not None
        }
        config = RollingConfig(
            **{
                **file_rolling,
                **overrides,
                "mfdfa": self._mfdfa_config(s_min=s_min, n_scales=n_scales, detrend_order=detrend_order),
            }
        )
        calendar_kind = _enum(CalendarKind, calendar) if calendar else None

        study_windows = _csv_list(windows, int)
        if study_windows:
            study = window_study(series, study_windows, config, calendar_kind)
            self._wrote(write_frame(study.to_frame(), self._output("window_study.csv")))
            for result in study.results:
                name = f"rolling_w{result.window}.csv"
                self._wrote(write_frame(result.to_frame(), self._output(name)))
            return

        if events is not None:
            event_set = read_events_csv(events)
        else:
            event_set = EventSet(**self._file_section("events"))
        result = rolling_ghe(series, config, calendar_kind)
        annotated = annotate_events(result, event_set)
        self._wrote(write_frame(annotated.to_frame(), self._output("rolling.csv")))
        self._wrote(write_frame(annotated.segments_frame(), self._output("segments.csv")))
        cprint(
            f"{result.count} windows of {result.window}; "
            f"corr(dh5, da5) = {strength_correlation(result):.3f}",
            "cyan",
        )

    def periods(self, path: str, kind: str = "returns", s_min: Optional[int] = None):
        """Whole-period h(2) for the configured periods (before/during the pandemic by default)."""
        series = read_series_csv(path, _enum(SeriesKind, kind))
        file_periods = self._file_section("periods")
        periods = [Period(**p) for p in file_periods] if file_periods else None
        summaries = period_summary(series, periods, self._mfdfa_config(s_min=s_min))
        self._wrote(write_frame(periods_frame(summaries), self._output("periods.csv")))

    def synth(
        self,
        kind: str = "fgn",
        n: int = 10000,
        h: float = 0.5,
        p: float = 0.75,
        levels: int = 16,
        shuffle_weights: bool = False,
        shuffled: bool = False,
    ):
        """Seeded synthetic series: white noise, fGn or a binomial cascade."""
        spec = SynthSpec(
            kind=_enum(SynthKind, kind), n=n, hurst=h, p=p, levels=levels, shuffle_weights=shuffle_weights
        )
        series = generate(spec, self._seed)
        if shuffled:
            series = shuffle(series, self._seed)
        identity = rng_identity()
        header = [
            f"rng={RNG_ALGORITHM} numpy={identity['numpy']} seed={self._seed}",
            f"source={series.source}",
        ]
        self._wrote(write_series_csv(series, self._output(f"synth_{kind}.csv"), header))

    def hurst_correct(
        self,
        h2: Optional[float] = None,
        n: int = 1,
        a1: float = DEFAULT_A1,
        fit: Optional[str] = None,
    ):
        """Finite-sample correction H2 = H2(n) (n + a1) / n, or fit (H2, a1) to `n,h2` points."""
        if fit is not None:
            result = fit_scaling(read_points_csv(fit))
            cprint(
                f"H2 = {result.h2_inf:.6g}, a1 = {result.a1:.6g} "
                f"(residual {result.residual_norm:.3g}, {result.iterations} evaluations)",
                "cyan",
            )
            return
        if h2 is None:
            raise UsageError("either --h2 or --fit is required", module="hurstscale")
        cprint(f"{apply_correction(h2, n, a1):.10g}", "cyan")

    def run(
        self,
        inputs: Optional[Sequence[str]] = None,
        report: Optional[bool] = None,
    ):
        """Full pipeline from --config, with --out_dir, --threads and --seed overriding it."""
        overrides: Dict[str, Any] = {
            "out_dir": self._out_dir_flag,
            "threads": self._threads_flag,
            "seed": self._seed_flag,
            "report": report,
        }
        paths = _csv_list(inputs, str)
        if paths:
            overrides["inputs"] = [{"path": p} for p in paths]
        result = run_pipeline(load_config(self._config_path, overrides))
        for artifact in result.manifest.artifact_paths:
            self._wrote(result.out_dir / artifact)
        cprint(f"config hash {result.manifest.config_hash}", "cyan")

    def schema(self):
        """JSON schema of every configuration type."""
        print(json.dumps(registered_schemas(), indent=2, sort_keys=True, default=str))


def main(argv: Optional[List[str]] = None) -> int:
    try:
        fire.Fire(MarketEfficiencyCLI, command=argv, name="market-efficiency")
    except fire.core.FireExit as e:
        return 0 if not e.code else 1
    except ValidationError as e:
        cprint(f"error: [cli] invalid configuration: {e}", "red", file=sys.stderr)
        return ConfigError.exit_code
    except EfficiencyError as e:
        cprint(f"error: {e}", "red", file=sys.stderr)
        return e.exit_code
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
