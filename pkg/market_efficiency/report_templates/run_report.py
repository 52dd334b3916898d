# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import textwrap
from typing import Any, Dict, List, Optional

from .base import ReportTemplate, ReportTemplateGeneratorBase


class StatsTableGenerator(ReportTemplateGeneratorBase):
    """Descriptive statistics with their jackknife errors, one row per statistic."""

    def gen(self, rows: List[Dict[str, Any]]) -> ReportTemplate:
        template_str = textwrap.dedent(
            """
            | kind | statistic | value | error |
            |---|---|---|---|
            {% for r in rows -%}
            | {{ r.kind }} | {{ r.statistic }} | {{ r.value|sig }} | {{ r.error|sig }} |
            {% endfor %}
            """
        )
        return ReportTemplate(template_str.lstrip("\n"), {"rows": rows})

    def data_examples(self):
        return [
            [
                {"kind": "returns", "statistic": "mean", "value": 0.00125, "error": 0.0005},
            ],
            [
                {"kind": "returns", "statistic": "kurtosis", "value": 9.75, "error": 1.5},
                {"kind": "abs_returns", "statistic": "skewness", "value": 2.5, "error": 0.25},
            ],
        ]


class PeriodTableGenerator(ReportTemplateGeneratorBase):

    def gen(self, rows: List[Dict[str, Any]]) -> ReportTemplate:
        template_str = textwrap.dedent(
            """
            | period | first | last | count | h(2) |
            |---|---|---|---|---|
            {% for r in rows -%}
            | {{ r.period }} | {{ r.first }} | {{ r.last }} | {{ r.count }} | {{ r.h2|fixed }} |
            {% endfor %}
            """
        )
        return ReportTemplate(template_str.lstrip("\n"), {"rows": rows})

    def data_examples(self):
        return [
            [
                {
                    "period": "before_pandemic",
                    "first": "2017-01-01",
                    "last": "2019-12-31",
                    "count": 1095,
                    "h2": 0.578,
                },
            ],
        ]


class SegmentTableGenerator(ReportTemplateGeneratorBase):

    def gen(self, rows: List[Dict[str, Any]]) -> ReportTemplate:
        template_str = textwrap.dedent(
            """
            | segment | from | to | windows | mean h(2) | mean dh(5) |
            |---|---|---|---|---|---|
            {% for r in rows -%}
            | {{ r.segment }} | {{ r.start }} | {{ r.end }} | {{ r.rows }} | {{ r.mean_h2|fixed }} | {{ r.mean_dh5|fixed }} |
            {% endfor %}
            """
        )
        return ReportTemplate(template_str.lstrip("\n"), {"rows": rows})

    def data_examples(self):
        return [
            [
                {
                    "segment": "baseline",
                    "start": "2019-07-01",
                    "end": "2020-03-10",
                    "rows": 180,
                    "mean_h2": 0.5,
                    "mean_dh5": 0.25,
                },
            ],
        ]


class RunReportGenerator(ReportTemplateGeneratorBase):
    """Markdown summary of one pipeline run.

    Tables are rendered by the section generators above and passed in as text.
    """

    def gen(
        self,
        instruments: List[Dict[str, Any]],
        config_hash: str,
        version: str,
        title: Optional[str] = None,
    ) -> ReportTemplate:
        template_str = textwrap.dedent(
            """
            # {{ title }}

            - tool version: {{ version }}
            - config hash: `{{ config_hash }}`
            {% for inst in instruments %}
            ## {{ inst.name }}

            ### Descriptive statistics

            {{ inst.stats_table }}
            {%- for roll in inst.rolling %}
            ### Rolling h(2): {{ roll.kind }}

            {{ roll.windows }} windows of {{ roll.window }} observations; mean h(2) {{ roll.h2_mean|fixed }}, standard deviation {{ roll.h2_std|fixed }}.

            {{ roll.segments_table }}
            {%- endfor %}
            {%- if inst.periods %}
            ### Periods

            {% for p in inst.periods -%}
            {{ p.kind }}:

            {{ p.table }}
            {% endfor %}
            {%- endif %}
            {%- endfor %}
            """
        )
        return ReportTemplate(
            template_str.lstrip("\n"),
            {
                "title": title or "Market efficiency run",
                "version": version,
                "config_hash": config_hash,
                "instruments": instruments,
            },
        )

    def data_examples(self):
        stats_table = StatsTableGenerator().gen(StatsTableGenerator().data_examples()[0]).render()
        segments_table = (
            SegmentTableGenerator().gen(SegmentTableGenerator().data_examples()[0]).render()
        )
        return [
            {
                "instruments": [
                    {
                        "name": "BTC",
                        "stats_table": stats_table,
                        "rolling": [
                            {
                                "kind": "returns",
                                "window": 1095,
                                "windows": 180,
                                "h2_mean": 0.5,
                                "h2_std": 0.025,
                                "segments_table": segments_table,
                            }
                        ],
                        "periods": [],
                    }
                ],
                "config_hash": "0" * 64,
                "version": "0.1.0",
            },
        ]
