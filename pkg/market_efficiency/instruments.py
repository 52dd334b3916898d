# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from datetime import date
from enum import Enum
from functools import lru_cache
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from .datatypes import CalendarKind, Period, default_window
from .schema_utils import json_schema_type

INDEX_SPAN = (date(1997, 7, 3), date(2024, 1, 19))
CRYPTO_SPAN = (date(2016, 3, 11), date(2024, 12, 31))


@json_schema_type
class InstrumentFamily(Enum):
    stock_index = "stock_index"
    volatility_index = "volatility_index"
    crypto = "crypto"


@json_schema_type(
    schema={
        "description": "A known instrument with its calendar and the span of the reference sample."
    }
)
class Instrument(BaseModel):
    model_config = ConfigDict(frozen=True)

    descriptor: str
    aliases: List[str] = []
    family: InstrumentFamily
    description: str
    span_start: date
    span_end: date

    @property
    def calendar(self) -> CalendarKind:
        if self.family == InstrumentFamily.crypto:
            return CalendarKind.seven_day
        return CalendarKind.trading_day

    @property
    def default_window(self) -> int:
        return default_window(self.calendar)

    def matches(self, descriptor: str) -> bool:
        needle = descriptor.lower()
        return needle == self.descriptor.lower() or needle in (a.lower() for a in self.aliases)


def resolve_instrument(descriptor: str) -> Optional[Instrument]:
    for instrument in all_registered_instruments():
        if instrument.matches(descriptor):
            return instrument
    return None


@lru_cache
def all_registered_instruments() -> List[Instrument]:
    return stock_indices() + crypto_assets()


def stock_indices() -> List[Instrument]:
    start, end = INDEX_SPAN
    return [
        Instrument(
            descriptor="DAX",
            aliases=["^GDAXI"],
            family=InstrumentFamily.stock_index,
            description="German blue-chip stock index",
            span_start=start,
            span_end=end,
        ),
        Instrument(
            descriptor="N225",
            aliases=["^N225", "Nikkei 225", "nikkei"],
            family=InstrumentFamily.stock_index,
            description="Nikkei 225 stock average",
            span_start=start,
            span_end=end,
        ),
        Instrument(
            descriptor="SSE",
            aliases=["000001.SS", "Shanghai Composite"],
            family=InstrumentFamily.stock_index,
            description="Shanghai Stock Exchange composite index",
            span_start=start,
            span_end=end,
        ),
        Instrument(
            descriptor="VIX",
            aliases=["^VIX"],
            family=InstrumentFamily.volatility_index,
            description="CBOE volatility index",
            span_start=start,
            span_end=end,
        ),
    ]


def crypto_assets() -> List[Instrument]:
    start, end = CRYPTO_SPAN
    return [
        Instrument(
            descriptor="BTC",
            aliases=["Bitcoin", "BTC-USD"],
            family=InstrumentFamily.crypto,
            description="Bitcoin",
            span_start=start,
            span_end=end,
        ),
        Instrument(
            descriptor="ETH",
            aliases=["Ethereum", "ETH-USD"],
            family=InstrumentFamily.crypto,
            description="Ethereum",
            span_start=start,
            span_end=end,
        ),
    ]


def before_and_during_pandemic() -> List[Period]:
    return [
        Period(name="before_covid", start=date(2017, 1, 1), end=date(2019, 12, 31)),
        Period(name="during_covid", start=date(2020, 1, 1), end=date(2020, 12, 30)),
    ]
