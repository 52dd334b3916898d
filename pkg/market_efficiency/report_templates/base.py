# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from dataclasses import dataclass
from typing import Any, Dict, List

from jinja2 import Environment

# decimals of exponents and strength measures in report tables
EXPONENT_DIGITS = 3
# significant digits of descriptive statistics
STATISTIC_DIGITS = 6


def fixed(value: float, digits: int = EXPONENT_DIGITS) -> str:
    return f"{float(value):.{digits}f}"


def significant(value: float, digits: int = STATISTIC_DIGITS) -> str:
    return f"{float(value):.{digits}g}"


def report_environment() -> Environment:
    env = Environment()
    env.filters["fixed"] = fixed
    env.filters["sig"] = significant
    return env


_ENV = report_environment()


@dataclass
class ReportTemplate:
    template: str
    data: Dict[str, Any]

    def render(self) -> str:
        return _ENV.from_string(self.template).render(self.data)


class ReportTemplateGeneratorBase:
    """
    Base class for report section generators.

    Templates format numbers with the `fixed` (exponents) and `sig`
    (statistics) filters so every table prints them alike.
    """

    def gen(self, *args, **kwargs) -> ReportTemplate:
        raise NotImplementedError()

    def data_examples(self) -> List[Any]:
        raise NotImplementedError()
