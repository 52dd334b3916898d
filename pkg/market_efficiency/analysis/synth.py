# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""Synthetic series with known scaling, used to validate the estimators.

Every generator is a deterministic function of its parameters and seed; the
random stream is numpy's PCG64 bit generator.
"""

import logging
import warnings
from typing import Dict

import numpy as np

from ..data.ingest import PriceSeries
from ..data.transform import DerivedSeries
from ..datatypes import CascadeSpec, SynthKind, SynthSpec
from ..errors import EmbeddingFailure, TooShort, UsageError

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"
MIN_LENGTH = 64
# eigenvalues of the circulant embedding below this are treated as negative
EMBEDDING_TOLERANCE = -1e-10


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def rng_identity() -> Dict[str, str]:
    return {"algorithm": RNG_ALGORITHM, "numpy": np.__version__}


def _check_length(n: int) -> None:
    if n < MIN_LENGTH:
        raise TooShort(f"synthetic series need n >= {MIN_LENGTH}, got {n}", module="synth")


def gaussian_noise(n: int, seed: int) -> DerivedSeries:
    _check_length(n)
    values = make_rng(seed).standard_normal(n)
    return DerivedSeries.from_values(values, source=f"noise(seed={seed})")


def fgn_autocovariance(k, hurst: float) -> np.ndarray:
    """Autocovariance of unit-variance fractional Gaussian noise at lags `k`."""
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(k - 1) ** two_h - 2.0 * k**two_h + (k + 1) ** two_h)


def _davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    gamma = fgn_autocovariance(np.arange(n + 1), hurst)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    if np.any(eigenvalues < EMBEDDING_TOLERANCE):
        raise EmbeddingFailure(
            f"circulant embedding is not positive semi-definite for n={n}, H={hurst}"
        )
    m = row.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(np.clip(eigenvalues, 0.0, None) / m) * z)
    return y.real[:n]


def _hosking(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    # Durbin-Levinson recursion on the exact autocovariance, O(n^2)
    gamma = fgn_autocovariance(np.arange(n), hurst)
    z = rng.standard_normal(n)
    x = np.empty(n)
    phi = np.zeros(n)
    v = gamma[0]
    x[0] = np.sqrt(v) * z[0]
    for k in range(1, n):
        prev = phi[: k - 1].copy()
        phi_kk = (gamma[k] - prev @ gamma[k - 1 : 0 : -1]) / v
        phi[: k - 1] = prev - phi_kk * prev[::-1]
        phi[k - 1] = phi_kk
        v *= 1.0 - phi_kk**2
        x[k] = phi[:k] @ x[k - 1 :: -1] + np.sqrt(v) * z[k]
    return x


def fgn(n: int, hurst: float, seed: int, allow_fallback: bool = True) -> DerivedSeries:
    """Stationary unit-variance fractional Gaussian noise with Hurst parameter `hurst`.

    Uses exact circulant-embedding (Davies-Harte) synthesis; when the embedding
    is not positive semi-definite it falls back to the Hosking recursion, which
    is exact but quadratic in n.
    """
    _check_length(n)
    if not 0.0 < hurst < 1.0:
        raise UsageError(f"hurst must lie in (0, 1), got {hurst}", module="synth")
    try:
        values = _davies_harte(n, hurst, make_rng(seed))
    except EmbeddingFailure as e:
        if not allow_fallback:
            raise
        warnings.warn(f"{e}; reverting to the Hosking method", RuntimeWarning, stacklevel=2)
        logger.warning("%s; reverting to the Hosking method", e)
        values = _hosking(n, hurst, make_rng(seed))
    return DerivedSeries.from_values(values, source=f"fgn(H={hurst:g},seed={seed})")


def binomial_cascade(spec: CascadeSpec) -> DerivedSeries:
    """Multiplicative binomial measure on 2**levels cells, normalized to mean 1.

    At every level each interval passes the fraction p to its left half and
    1 - p to its right half; with `shuffle_weights` the order is drawn per node.
    """
    rng = make_rng(spec.seed) if spec.shuffle_weights else None
    weights = np.ones(1)
    for _ in range(spec.levels):
        left = np.full(weights.size, spec.p)
        if rng is not None:
            left = np.where(rng.random(weights.size) < 0.5, 1.0 - spec.p, spec.p)
        weights = np.column_stack([weights * left, weights * (1.0 - left)]).ravel()
    values = weights * float(2**spec.levels)
    return DerivedSeries.from_values(
        values, source=f"cascade(p={spec.p:g},levels={spec.levels})"
    )


def analytic_cascade_ghe(p: float, q: float) -> float:
    """Closed-form h(q) of the binomial cascade.

    The partition function of the measure at resolution 2**-k is
    (p**q + (1-p)**q)**k, so tau(q) = -log2(p**q + (1-p)**q) and
    h(q) = (1 + tau(q)) / q. At q = 0 the limit is -(log2 p + log2(1-p)) / 2.
    """
    if not 0.5 <= p < 1.0:
        raise UsageError(f"p must lie in [0.5, 1), got {p}", module="synth")
    if abs(q) < 1e-9:
        return float(-0.5 * (np.log2(p) + np.log2(1.0 - p)))
    return float((1.0 - np.log2(p**q + (1.0 - p) ** q)) / q)


def analytic_cascade_curve(p: float, q_grid) -> np.ndarray:
    return np.array([analytic_cascade_ghe(p, float(q)) for q in q_grid])


def shuffle(series: DerivedSeries, seed: int) -> DerivedSeries:
    """Uniform random permutation of the values; dates keep their positions."""
    values = make_rng(seed).permutation(series.values)
    return DerivedSeries(
        series.kind, values, f"{series.source}:shuffled(seed={seed})", series.dates
    )


def generate(spec: SynthSpec, seed: int) -> DerivedSeries:
    """Dispatch on `spec.kind`; `spec.seed` wins over `seed` when set."""
    seed = spec.seed if spec.seed is not None else seed
    if spec.kind == SynthKind.noise:
        series = gaussian_noise(spec.n, seed)
    elif spec.kind == SynthKind.fgn:
        series = fgn(spec.n, spec.hurst, seed)
    elif spec.kind == SynthKind.cascade:
        series = binomial_cascade(spec.cascade_spec(seed))
    else:
        raise UsageError(f"unknown synthetic kind {spec.kind}", module="synth")
    logger.info("generated %s of length %d", series.source, len(series))
    return series


def synthetic_prices(
    series: DerivedSeries, scale: float = 0.01, start_price: float = 100.0
) -> PriceSeries:
    """Price path whose log returns are `scale` times the series values."""
    log_path = np.concatenate([[0.0], np.cumsum(scale * series.values)])
    dates = DerivedSeries.from_values(np.zeros(log_path.size)).dates
    return PriceSeries(series.source, dates, start_price * np.exp(log_path))
