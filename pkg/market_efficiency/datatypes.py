# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from datetime import date
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ScaleTooLarge, ScaleTooSmall, SeriesTooShort
from .schema_utils import json_schema_type

# default q-grid: -5 ... 5 in steps of 0.25
DEFAULT_Q_GRID = [round(-5.0 + 0.25 * i, 10) for i in range(41)]
DEFAULT_S_MIN = 16
DEFAULT_N_SCALES = 20
Q_TOLERANCE = 1e-9


@json_schema_type
class SeriesKind(Enum):
    returns = "returns"
    absolute_returns = "abs_returns"
    volatility_increments = "vol_increments"


@json_schema_type(
    schema={
        "description": """
How observations are spaced in calendar time. Stock indices only trade on
working days; cryptocurrencies trade every day of the week.
""",
    }
)
class CalendarKind(Enum):
    trading_day = "trading_day"
    seven_day = "seven_day"


@json_schema_type
class Quality(Enum):
    ok = "ok"
    # h(q) increases somewhere along the grid by more than the tolerance
    suspect = "suspect"


@json_schema_type
class ColumnSpec(BaseModel):
    date_col: str = "date"
    price_col: str = "close"
    # strptime format; ISO-8601 when omitted
    date_format: Optional[str] = None


@json_schema_type(
    schema={
        "description": "Scale grid, q-grid, detrending order and fit range of one MFDFA evaluation."
    }
)
class MfdfaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    # explicit scale grid; when omitted the default grid is resolved per series length
    scales: Optional[List[int]] = None
    q_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_Q_GRID))
    detrend_order: int = 3
    fit_range: Optional[Tuple[int, int]] = None

    # parameters of the default scale grid
    s_min: int = DEFAULT_S_MIN
    s_max: Optional[int] = None
    n_scales: int = DEFAULT_N_SCALES

    @field_validator("detrend_order")
    @classmethod
    def validate_order(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"detrend_order must be >= 0, got {v}")
        return v

    @field_validator("q_grid")
    @classmethod
    def validate_q_grid(cls, v: List[float]) -> List[float]:
        if len(v) < 3:
            raise ValueError("q_grid needs at least 3 points")
        q = np.asarray(v, dtype=float)
        if np.any(np.diff(q) <= 0):
            raise ValueError("q_grid must be strictly increasing")
        if not np.allclose(q, -q[::-1], atol=Q_TOLERANCE, rtol=0.0):
            raise ValueError("q_grid must be symmetric about 0")
        return [float(x) for x in q]

    @field_validator("scales")
    @classmethod
    def validate_scales(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is None:
            return v
        if len(v) == 0:
            raise ValueError("scales must not be empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("scales must be strictly increasing")
        return v

    @field_validator("n_scales")
    @classmethod
    def validate_n_scales(cls, v: int) -> int:
        if v < 4:
            raise ValueError("n_scales must be >= 4 (the scaling fit needs 4 scales)")
        return v

    @model_validator(mode="after")
    def validate_scale_bounds(self) -> "MfdfaConfig":
        smallest = self.detrend_order + 2
        if self.scales is not None and self.scales[0] < smallest:
            raise ValueError(
                f"every scale must be >= detrend_order + 2 = {smallest}, got {self.scales[0]}"
            )
        if self.s_min < smallest:
            raise ValueError(f"s_min must be >= detrend_order + 2 = {smallest}")
        if self.s_max is not None and self.s_max <= self.s_min:
            raise ValueError("s_max must be > s_min")
        if self.fit_range is not None and self.fit_range[0] >= self.fit_range[1]:
            raise ValueError("fit_range must be an increasing (s_min, s_max) pair")
        return self

    @classmethod
    def from_range(
        cls, q_min: float = -5.0, q_max: float = 5.0, q_step: float = 0.25, **kwargs
    ) -> "MfdfaConfig":
        count = int(round((q_max - q_min) / q_step)) + 1
        grid = [round(q_min + q_step * i, 10) for i in range(count)]
        return cls(q_grid=grid, **kwargs)

    @property
    def q_step(self) -> float:
        return self.q_grid[1] - self.q_grid[0]

    def resolve_scales(self, n: int) -> np.ndarray:
        """The integer scale grid used for a series of length `n`."""
        largest = n // 4
        if self.scales is not None:
            scales = np.asarray(self.scales, dtype=int)
            if scales[-1] > largest:
                raise ScaleTooLarge(
                    f"scale {scales[-1]} exceeds N/4 = {largest} for a series of length {n}"
                )
            return scales

        upper = largest if self.s_max is None else min(self.s_max, largest)
        if upper <= self.s_min:
            raise SeriesTooShort(
                f"series of length {n} is too short for scales starting at s_min={self.s_min}",
                module="mfdfa",
            )
        grid = np.geomspace(self.s_min, upper, self.n_scales)
        scales = np.unique(np.round(grid).astype(int))
        if scales[0] < self.detrend_order + 2:
            raise ScaleTooSmall(f"scale {scales[0]} cannot support order {self.detrend_order}")
        return scales


@json_schema_type
class RollingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    # observations per window; defaults per calendar kind when omitted
    window: Optional[int] = None
    step: int = 1
    mfdfa: MfdfaConfig = Field(default_factory=MfdfaConfig)
    threads: int = 1
    # enables the finite-sample corrected h(2) column
    correction_a1: Optional[float] = None

    @field_validator("window")
    @classmethod
    def validate_window(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 8:
            raise ValueError(f"window must be >= 8 observations, got {v}")
        return v

    @field_validator("step", "threads")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be >= 1, got {v}")
        return v

    @field_validator("correction_a1")
    @classmethod
    def validate_a1(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError(f"correction_a1 must be > 0, got {v}")
        return v

    def resolve_window(self, calendar: CalendarKind) -> int:
        if self.window is not None:
            return self.window
        return default_window(calendar)


def default_window(calendar: CalendarKind) -> int:
    # about three years of observations
    if calendar == CalendarKind.seven_day:
        return 1095
    return 750


@json_schema_type
class Event(BaseModel):
    name: str
    date: date


def default_events() -> List[Event]:
    return [
        Event(name="lehman_bankruptcy", date=date(2008, 9, 15)),
        Event(name="who_pandemic_declaration", date=date(2020, 3, 11)),
        Event(name="who_pandemic_end", date=date(2023, 5, 5)),
    ]


@json_schema_type
class EventSet(BaseModel):
    events: List[Event] = Field(default_factory=default_events)

    @field_validator("events")
    @classmethod
    def validate_events(cls, v: List[Event]) -> List[Event]:
        names = [e.name for e in v]
        if len(set(names)) != len(names):
            raise ValueError("event names must be unique")
        return sorted(v, key=lambda e: (e.date, e.name))

    @classmethod
    def empty(cls) -> "EventSet":
        return cls(events=[])


@json_schema_type
class Period(BaseModel):
    name: str
    start: date
    end: date

    @model_validator(mode="after")
    def validate_order(self) -> "Period":
        if self.start >= self.end:
            raise ValueError(f"period {self.name!r}: start must precede end")
        return self


@json_schema_type
class SynthKind(Enum):
    noise = "noise"
    fgn = "fgn"
    cascade = "cascade"


@json_schema_type
class SynthSpec(BaseModel):
    kind: SynthKind = SynthKind.fgn
    n: int = 10000
    hurst: float = 0.5
    p: float = 0.75
    levels: int = 16
    # falls back to the run seed when omitted
    seed: Optional[int] = None
    shuffle_weights: bool = False

    @field_validator("hurst")
    @classmethod
    def validate_hurst(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {v}")
        return v

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: float) -> float:
        if not 0.5 < v < 1.0:
            raise ValueError(f"cascade weight p must lie in (0.5, 1), got {v}")
        return v

    @field_validator("levels")
    @classmethod
    def validate_levels(cls, v: int) -> int:
        if v < 8:
            raise ValueError(f"cascade levels must be >= 8, got {v}")
        return v

    @field_validator("n")
    @classmethod
    def validate_n(cls, v: int) -> int:
        if v < 64:
            raise ValueError(f"n must be >= 64, got {v}")
        return v

    def cascade_spec(self, seed: int) -> "CascadeSpec":
        return CascadeSpec(
            levels=self.levels, p=self.p, seed=seed, shuffle_weights=self.shuffle_weights
        )


@json_schema_type
class PriceInput(BaseModel):
    path: Path
    # instrument descriptor; the file stem when omitted
    instrument: Optional[str] = None
    columns: ColumnSpec = Field(default_factory=ColumnSpec)
    calendar: Optional[CalendarKind] = None

    @property
    def name(self) -> str:
        return self.instrument or self.path.stem


@json_schema_type(
    schema={
        "description": "Declarative configuration of a full pipeline run (YAML file or CLI flags)."
    }
)
class PipelineConfig(BaseModel):
    inputs: List[PriceInput] = Field(default_factory=list)
    synthetic: Optional[SynthSpec] = None
    kinds: List[SeriesKind] = Field(default_factory=lambda: list(SeriesKind))
    mfdfa: MfdfaConfig = Field(default_factory=MfdfaConfig)
    rolling: RollingConfig = Field(default_factory=RollingConfig)
    events: EventSet = Field(default_factory=EventSet)
    periods: List[Period] = Field(default_factory=list)
    out_dir: Path = Path("out")
    seed: int = 0
    threads: int = 1
    stats_blocks: int = 20
    skip_bad_rows: bool = False
    report: bool = False
    # finite-sample correction applied to the volatility-increment rolling path
    vi_correction_a1: Optional[float] = 3.0

    @field_validator("kinds")
    @classmethod
    def validate_kinds(cls, v: List[SeriesKind]) -> List[SeriesKind]:
        if not v:
            raise ValueError("at least one series kind is required")
        if len(set(v)) != len(v):
            raise ValueError("series kinds must be unique")
        return v

    @field_validator("stats_blocks")
    @classmethod
    def validate_blocks(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"stats_blocks must be >= 2, got {v}")
        return v

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"threads must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def validate_sources(self) -> "PipelineConfig":
        if bool(self.inputs) == (self.synthetic is not None):
            raise ValueError("exactly one of `inputs` or `synthetic` must be given")
        names = [i.name for i in self.inputs]
        if len(set(names)) != len(names):
            raise ValueError("input instruments must have unique names")
        return self


@json_schema_type
class CascadeSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    # series length is 2**levels
    levels: int = 16
    p: float = 0.75
    seed: int = 0
    # seeded random left/right order of the two weights at every node
    shuffle_weights: bool = False

    @field_validator("levels")
    @classmethod
    def validate_levels(cls, v: int) -> int:
        if v < 8:
            raise ValueError(f"cascade levels must be >= 8, got {v}")
        return v

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: float) -> float:
        if not 0.5 < v < 1.0:
            raise ValueError(f"cascade weight p must lie in (0.5, 1), got {v}")
        return v
