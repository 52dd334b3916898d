# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import os
from pathlib import Path

import pytest

DATA_ENV = "MARKET_EFFICIENCY_DATA"


def write_csv(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


@pytest.fixture
def price_csv(tmp_path):
    def make(rows, header="date,close", name="prices.csv"):
        lines = [header] + [",".join(str(v) for v in row) for row in rows]
        return write_csv(tmp_path / name, "\n".join(lines) + "\n")

    return make


@pytest.fixture
def data_dir():
    """Directory of real price files named <instrument>.csv; skips when unset."""
    root = os.environ.get(DATA_ENV)
    if not root:
        pytest.skip(f"set {DATA_ENV} to run reproductions on real price data")
    return Path(root)
