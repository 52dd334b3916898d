# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""End-to-end statistical checks against synthetic oracles and, when supplied, real data."""

import numpy as np
import pytest

from market_efficiency.analysis.mfdfa import mfdfa
from market_efficiency.analysis.rolling import (
    period_summary,
    rolling_ghe,
    strength_correlation,
    window_study,
)
from market_efficiency.analysis.spectrum import delta_h, singularity_spectrum
from market_efficiency.analysis.synth import (
    analytic_cascade_curve,
    binomial_cascade,
    fgn,
    gaussian_noise,
    shuffle,
)
from market_efficiency.data.ingest import load_price_csv
from market_efficiency.data.transform import derive_all, descriptive_stats
from market_efficiency.datatypes import CascadeSpec, MfdfaConfig, RollingConfig
from market_efficiency.instruments import all_registered_instruments

pytestmark = pytest.mark.slow


def test_white_noise_is_efficient():
    curves = [mfdfa(gaussian_noise(10000, seed)) for seed in range(100)]
    assert 0.47 <= np.mean([c.h2 for c in curves]) <= 0.53
    assert np.mean([abs(delta_h(c, 5.0)) for c in curves]) < 0.08


@pytest.mark.parametrize("hurst", [0.3, 0.5, 0.7])
def test_fgn_closure(hurst):
    estimates = [mfdfa(fgn(10000, hurst, seed)).h2 for seed in range(50)]
    assert np.mean(estimates) == pytest.approx(hurst, abs=0.05)


def test_cascade_matches_closed_form():
    series = binomial_cascade(CascadeSpec(levels=16, p=0.75))
    curve = mfdfa(series)
    analytic = analytic_cascade_curve(0.75, curve.q)
    error = np.abs(curve.h - analytic)
    assert np.all(error[curve.q >= 1.0] < 0.05)
    assert np.all(error[curve.q <= -1.0] < 0.10)
    assert curve.h2 == pytest.approx(0.839, abs=0.05)


def test_shuffled_fgn_loses_memory():
    estimates = [mfdfa(shuffle(fgn(10000, 0.8, seed), seed + 100)).h2 for seed in range(10)]
    assert np.mean(estimates) == pytest.approx(0.5, abs=0.05)


def test_shuffled_cascade_keeps_distributional_multifractality():
    series = binomial_cascade(CascadeSpec(levels=16, p=0.75))
    curves = [mfdfa(shuffle(series, seed)) for seed in range(5)]
    assert np.mean([c.h2 for c in curves]) == pytest.approx(0.5, abs=0.05)
    assert np.mean([delta_h(c, 5.0) for c in curves]) > 0.1


def _analytic_cascade_alpha(p, q):
    # derivative of tau(q) = -log2(p**q + (1 - p)**q)
    a, b = p**q, (1.0 - p) ** q
    return -(a * np.log(p) + b * np.log(1.0 - p)) / ((a + b) * np.log(2.0))


def test_cascade_spectrum_range():
    curve = mfdfa(binomial_cascade(CascadeSpec(levels=16, p=0.75)))
    alpha = singularity_spectrum(curve)
    assert alpha.alpha_at(5.0) == pytest.approx(_analytic_cascade_alpha(0.75, 5.0), abs=0.1)
    assert alpha.alpha_at(-5.0) == pytest.approx(_analytic_cascade_alpha(0.75, -5.0), abs=0.1)


def test_smaller_windows_fluctuate_more():
    series = fgn(6000, 0.6, seed=11)
    # h(2) only needs q = 2 on the grid
    config = RollingConfig(step=5, mfdfa=MfdfaConfig.from_range(-2.0, 2.0, 1.0))
    study = window_study(series, [547, 1095, 1825], config)
    std = study.h2_std
    assert std[0] > std[1] > std[2]


def _price_file(data_dir, descriptor):
    path = data_dir / f"{descriptor}.csv"
    if not path.is_file():
        pytest.skip(f"no {path.name} in {data_dir}")
    return path


@pytest.mark.parametrize(
    "descriptor, before, during",
    [("BTC", 0.578, 0.493), ("ETH", 0.605, 0.561)],
)
def test_pandemic_periods(data_dir, descriptor, before, during):
    prices = load_price_csv(_price_file(data_dir, descriptor), instrument=descriptor)
    returns, _, _ = derive_all(prices)
    first, second = period_summary(returns)
    assert first.h2 == pytest.approx(before, abs=0.05)
    assert second.h2 == pytest.approx(during, abs=0.05)
    assert first.h2 > second.h2


@pytest.mark.parametrize("instrument", all_registered_instruments(), ids=lambda i: i.descriptor)
def test_volatility_increments_are_anti_persistent(data_dir, instrument):
    prices = load_price_csv(_price_file(data_dir, instrument.descriptor), instrument=instrument.descriptor)
    _, _, increments = derive_all(prices)
    result = rolling_ghe(increments, RollingConfig(step=10), instrument.calendar)
    h2 = result.column("h2")
    inside = np.count_nonzero((h2 >= -0.02) & (h2 <= 0.12))
    assert inside >= 0.95 * h2.size


def test_bitcoin_strength_paths_agree(data_dir):
    prices = load_price_csv(_price_file(data_dir, "BTC"), instrument="BTC")
    returns, _, _ = derive_all(prices)
    result = rolling_ghe(returns, RollingConfig(step=10))
    assert strength_correlation(result) > 0.8


def test_bitcoin_volatility_increment_moments(data_dir):
    prices = load_price_csv(_price_file(data_dir, "BTC"), instrument="BTC")
    _, _, increments = derive_all(prices)
    report = descriptive_stats(increments)
    assert report.variance.value == pytest.approx(2.86, abs=0.07)
    assert report.kurtosis.value == pytest.approx(4.2, abs=0.3)
