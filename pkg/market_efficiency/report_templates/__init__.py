# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from .base import ReportTemplate, ReportTemplateGeneratorBase
from .run_report import (
    PeriodTableGenerator,
    RunReportGenerator,
    SegmentTableGenerator,
    StatsTableGenerator,
)
