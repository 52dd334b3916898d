# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""End-to-end run: ingest -> transforms -> statistics -> rolling GHE -> exports.

Artifacts are staged in a sibling temporary directory and moved into place
only when every stage succeeded. The manifest carries no timestamps, so two
runs with the same config and inputs write byte-identical files.
"""

import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd
import yaml
from pydantic import ValidationError

from . import __version__
from .analysis.rolling import (
    annotate_events,
    period_summary,
    periods_frame,
    rolling_ghe,
    rolling_summary,
)
from .analysis.synth import generate, rng_identity, synthetic_prices
from .data.ingest import PriceSeries, infer_calendar, load_price_csv
from .data.transform import (
    DerivedSeries,
    derive_all,
    descriptive_stats,
    stats_frame,
    write_series_csv,
)
from .datatypes import CalendarKind, PipelineConfig, RollingConfig, SeriesKind
from .errors import ConfigError
from .instruments import resolve_instrument
from .report_templates import (
    PeriodTableGenerator,
    RunReportGenerator,
    SegmentTableGenerator,
    StatsTableGenerator,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
# run-location settings that do not change any artifact
VOLATILE_FIELDS = {"out_dir", "threads"}


def validate_config(raw: Union[PipelineConfig, Dict[str, Any]]) -> PipelineConfig:
    if isinstance(raw, PipelineConfig):
        return raw
    try:
        return PipelineConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from None


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None
) -> PipelineConfig:
    """YAML config file (optional) with `overrides` applied on top."""
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"no such config file: {path}")
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: the top level must be a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return validate_config(data)


def canonical_config(config: PipelineConfig) -> Dict[str, Any]:
    dumped = config.model_dump(mode="json", exclude=VOLATILE_FIELDS)
    return json.loads(json.dumps(dumped, sort_keys=True))


def config_hash(config: PipelineConfig) -> str:
    """SHA-256 of the canonical JSON form of the config."""
    text = json.dumps(canonical_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


@dataclass
class RunManifest:
    version: str
    config_hash: str
    config: Dict[str, Any]
    inputs: List[Dict[str, str]] = field(default_factory=list)
    artifacts: List[Dict[str, str]] = field(default_factory=list)
    rng: Optional[Dict[str, str]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "tool": "market-efficiency",
            "version": self.version,
            "config_hash": self.config_hash,
            "config": self.config,
            "inputs": self.inputs,
            "artifacts": self.artifacts,
        }
        if self.rng is not None:
            data["rng"] = self.rng
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def artifact_paths(self) -> List[str]:
        return [a["path"] for a in self.artifacts]


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    manifest: RunManifest


@dataclass(frozen=True)
class _Source:
    name: str
    prices: PriceSeries
    calendar: CalendarKind


def _sources(config: PipelineConfig) -> Tuple[List[_Source], List[Dict[str, str]]]:
    if config.synthetic is not None:
        series = generate(config.synthetic, config.seed)
        prices = synthetic_prices(series)
        return [_Source("synthetic", prices, infer_calendar(prices.dates))], []

    sources, inputs = [], []
    for entry in config.inputs:
        prices = load_price_csv(
            entry.path, entry.columns, skip_bad_rows=config.skip_bad_rows, instrument=entry.name
        )
        calendar = entry.calendar
        if calendar is None:
            registered = resolve_instrument(entry.name)
            calendar = registered.calendar if registered else infer_calendar(prices.dates)
        sources.append(_Source(entry.name, prices, calendar))
        inputs.append({"path": str(entry.path), "sha256": file_sha256(entry.path)})
    return sources, inputs


def _rolling_config(config: PipelineConfig, kind: SeriesKind) -> RollingConfig:
    a1 = config.rolling.correction_a1
    if a1 is None and kind == SeriesKind.volatility_increments:
        a1 = config.vi_correction_a1
    return config.rolling.model_copy(
        update={"mfdfa": config.mfdfa, "threads": config.threads, "correction_a1": a1}
    )


def _analyze_source(
    config: PipelineConfig, source: _Source, target: Path
) -> Dict[str, Any]:
    """Writes every artifact of one source into `target`; returns report data."""
    target.mkdir(parents=True, exist_ok=True)
    derived: Dict[SeriesKind, DerivedSeries] = dict(
        zip(list(SeriesKind), derive_all(source.prices))
    )
    for kind, series in derived.items():
        write_series_csv(series, target / f"{kind.value}.csv")

    reports = [(kind, descriptive_stats(series, config.stats_blocks)) for kind, series in derived.items()]
    stats = stats_frame(reports)
    write_frame(stats, target / "stats.csv")

    rolling_data, period_data = [], []
    for kind in config.kinds:
        series = derived[kind]
        result = rolling_ghe(series, _rolling_config(config, kind), source.calendar)
        annotated = annotate_events(result, config.events)
        write_frame(annotated.to_frame(), target / f"rolling_{kind.value}.csv")
        summary = rolling_summary(result)
        rolling_data.append(
            {
                "kind": kind.value,
                "window": result.window,
                "windows": result.count,
                "h2_mean": summary["h2_mean"],
                "h2_std": summary["h2_std"],
                "segments_table": SegmentTableGenerator()
                .gen(annotated.segments_frame().to_dict("records"))
                .render(),
            }
        )
        if config.periods:
            table = periods_frame(period_summary(series, config.periods, config.mfdfa))
            write_frame(table, target / f"periods_{kind.value}.csv")
            period_data.append(
                {
                    "kind": kind.value,
                    "table": PeriodTableGenerator().gen(table.to_dict("records")).render(),
                }
            )

    return {
        "name": source.name,
        "stats_table": StatsTableGenerator().gen(stats.to_dict("records")).render(),
        "rolling": rolling_data,
        "periods": period_data,
    }


def _prepare_out_dir(out_dir: Path) -> None:
    if out_dir.exists():
        if not out_dir.is_dir():
            raise ConfigError(f"output path {out_dir} is not a directory")
        if any(out_dir.iterdir()) and not (out_dir / MANIFEST_NAME).is_file():
            raise ConfigError(f"refusing to replace {out_dir}: it is not a previous run directory")
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir.parent, os.W_OK):
        raise ConfigError(f"output directory {out_dir.parent} is not writable")


def run_pipeline(config: Union[PipelineConfig, Dict[str, Any]]) -> RunResult:
    """Run every stage and publish the artifacts all at once into `config.out_dir`."""
    config = validate_config(config)
    out_dir = Path(config.out_dir)
    _prepare_out_dir(out_dir)
    digest = config_hash(config)
    logger.info("run %s into %s", digest[:12], out_dir)

    staging = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent))
    staging.chmod(0o755)
    try:
        sources, inputs = _sources(config)
        nested = len(sources) > 1
        report_data = [
            _analyze_source(config, source, staging / source.name if nested else staging)
            for source in sources
        ]
        if config.report:
            text = RunReportGenerator().gen(report_data, digest, __version__).render()
            (staging / "report.md").write_text(text.rstrip("\n") + "\n")

        artifacts = [
            {"path": p.relative_to(staging).as_posix(), "sha256": file_sha256(p)}
            for p in sorted(staging.rglob("*"))
            if p.is_file()
        ]
        manifest = RunManifest(
            version=__version__,
            config_hash=digest,
            config=canonical_config(config),
            inputs=inputs,
            artifacts=artifacts,
            rng=rng_identity() if config.synthetic is not None else None,
        )
        (staging / MANIFEST_NAME).write_text(manifest.to_json())
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    if out_dir.exists():
        shutil.rmtree(out_dir)
    os.replace(staging, out_dir)
    logger.info("wrote %d artifacts to %s", len(manifest.artifacts), out_dir)
    return RunResult(out_dir, manifest)
