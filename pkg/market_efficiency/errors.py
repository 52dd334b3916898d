# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from datetime import date
from typing import Optional


class EfficiencyError(Exception):
    """Base class of every error raised by the toolkit.

    `module` names the stage the error originated from and is reported by the
    CLI; `exit_code` is the process exit status for that class of failure.
    """

    exit_code: int = 1
    module: str = "market_efficiency"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class UsageError(EfficiencyError, ValueError):
    exit_code = 1


class DataError(EfficiencyError, ValueError):
    exit_code = 2


class NumericalError(EfficiencyError, ArithmeticError):
    exit_code = 3


class ConfigError(UsageError):
    module = "cli"


# ingest


class PriceFileNotFound(DataError, FileNotFoundError):
    module = "ingest"


class ParseError(DataError):
    module = "ingest"

    def __init__(self, row: int, column: str, reason: str):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column
        self.reason = reason


class EmptySeries(DataError):
    module = "ingest"


class NonPositivePrice(DataError):
    module = "ingest"

    def __init__(self, row: int, value: float):
        super().__init__(f"row {row}: close must be > 0, got {value!r}")
        self.row = row
        self.value = value


class DuplicateDate(DataError):
    module = "ingest"

    def __init__(self, row: int, day: date):
        super().__init__(f"row {row}: duplicate date {day.isoformat()}")
        self.row = row
        self.day = day


# transform


class SeriesTooShort(DataError):
    module = "transform"


class WrongKind(UsageError):
    module = "transform"


class TooFewNonZero(DataError):
    module = "transform"


class TooShort(DataError):
    module = "transform"


# mfdfa


class ScaleTooLarge(UsageError):
    module = "mfdfa"


class ScaleTooSmall(UsageError):
    module = "mfdfa"


class AllZeroVariances(NumericalError):
    module = "mfdfa"


class InsufficientScales(NumericalError):
    module = "mfdfa"


class DegenerateSeries(NumericalError):
    module = "mfdfa"


# spectrum


class GridTooSmall(UsageError):
    module = "spectrum"


class QNotOnGrid(UsageError):
    module = "spectrum"


class QZero(UsageError):
    module = "spectrum"


# rolling


class WindowTooLarge(DataError):
    module = "rolling"


class PeriodTooShort(DataError):
    module = "rolling"


class PeriodOutsideData(DataError):
    module = "rolling"


# hurstscale


class InvalidA1(UsageError):
    module = "hurstscale"


class SingularFit(NumericalError):
    module = "hurstscale"


class NonConvergence(NumericalError):
    module = "hurstscale"


# synth


class EmbeddingFailure(NumericalError):
    module = "synth"
