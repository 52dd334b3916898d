# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""Multifractal detrended fluctuation analysis.

The pipeline is: profile -> forward and backward segmentation at every scale
-> polynomial detrending -> q-th order fluctuation function -> log-log
regression of F_q(s) on s, whose slope is the generalized Hurst exponent h(q).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg, special, stats

from ..data.transform import DerivedSeries
from ..datatypes import MfdfaConfig, Q_TOLERANCE, Quality
from ..errors import (
    AllZeroVariances,
    DegenerateSeries,
    InsufficientScales,
    QNotOnGrid,
    ScaleTooLarge,
    ScaleTooSmall,
    SeriesTooShort,
    TooShort,
    UsageError,
)

logger = logging.getLogger(__name__)

# largest allowed increase of h(q) between adjacent grid points
MONOTONICITY_TOLERANCE = 0.02
MIN_FIT_SCALES = 4

ArrayLike = Union[DerivedSeries, Sequence[float], np.ndarray]


def _values(series: ArrayLike) -> np.ndarray:
    if isinstance(series, DerivedSeries):
        return series.values
    return np.asarray(series, dtype=float)


def profile(series: ArrayLike) -> np.ndarray:
    """Cumulative sum of the mean-subtracted series; Y(N) is 0 up to rounding."""
    x = _values(series)
    if x.size < 2:
        raise TooShort(f"profile needs >= 2 values, got {x.size}", module="mfdfa")
    return np.cumsum(x - x.mean())


@lru_cache(maxsize=512)
def detrend_basis(s: int, p: int) -> np.ndarray:
    """Orthonormal basis of degree-p polynomials sampled on the abscissa 1..s.

    The abscissa is mapped onto [-1, 1] and expanded in Legendre polynomials
    before the QR factorization; the spanned space is the same as for raw
    powers of 1..s.
    """
    x = np.arange(1, s + 1, dtype=float)
    t = (2.0 * x - (s + 1)) / (s - 1)
    vander = np.polynomial.legendre.legvander(t, p)
    q, _ = linalg.qr(vander, mode="economic")
    q.setflags(write=False)
    return q


def segment_index_sets(n: int, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """0-based start offsets of the forward and backward segments.

    Forward segments start at (v - 1) * s; backward segments are counted from
    the end of the profile, the last s points first.
    """
    ns = n // s
    forward = np.arange(ns) * s
    backward = n - (np.arange(ns) + 1) * s
    return forward, backward


def segment_variances(profile: np.ndarray, s: int, p: int) -> np.ndarray:
    """Residual variances of the 2*Ns segments at scale `s` after a degree-`p` fit.

    The first Ns entries are the forward segments, the next Ns the backward
    segments starting from the end of the profile.
    """
    y = np.asarray(profile, dtype=float)
    if s <= p + 1:
        raise ScaleTooSmall(f"scale {s} needs more than {p + 1} points for order {p}")
    ns = y.size // s
    if ns == 0:
        raise ScaleTooLarge(f"scale {s} exceeds the profile length {y.size}")

    starts = np.concatenate(segment_index_sets(y.size, s))
    segments = y[starts[:, None] + np.arange(s)]
    basis = detrend_basis(s, p)
    residual = segments - (segments @ basis) @ basis.T
    return np.mean(residual**2, axis=1)


def _log_power_means(variances: np.ndarray, q_grid: np.ndarray) -> Tuple[np.ndarray, int]:
    """ln F_q for every q of the grid, plus the count of zero-variance segments.

    Zero variances count towards the mean for q > 0 and are excluded for
    q <= 0, where their negative moments diverge.
    """
    v = np.asarray(variances, dtype=float)
    if np.any(v < 0):
        raise UsageError("segment variances must be >= 0", module="mfdfa")
    positive = v > 0
    if not np.any(positive):
        raise AllZeroVariances("every segment variance is zero")
    zeros = int(v.size - np.count_nonzero(positive))

    with np.errstate(divide="ignore"):
        log_v = np.log(v)
    log_pos = log_v[positive]

    out = np.empty(q_grid.size)
    for i, q in enumerate(q_grid):
        if abs(q) < Q_TOLERANCE:
            out[i] = 0.5 * np.mean(log_pos)
        elif q > 0:
            out[i] = (special.logsumexp(0.5 * q * log_v) - np.log(v.size)) / q
        else:
            out[i] = (special.logsumexp(0.5 * q * log_pos) - np.log(log_pos.size)) / q
    return out, zeros


def fluctuation_function(variances: Sequence[float], q: float) -> float:
    """q-th order fluctuation function F_q of one scale's segment variances.

    q = 0 uses the logarithmic-average limit exp(mean(ln F^2) / 2).
    """
    log_f, zeros = _log_power_means(np.asarray(variances, dtype=float), np.array([float(q)]))
    if zeros and q <= 0:
        logger.debug("excluded %d zero-variance segments at q=%g", zeros, q)
    return float(np.exp(log_f[0]))


@dataclass(frozen=True)
class FluctuationSurface:
    q_grid: np.ndarray
    scales: np.ndarray
    # shape (len(q_grid), len(scales))
    fluctuations: np.ndarray
    # per scale: the 2*Ns segment variances
    variances: Tuple[np.ndarray, ...]
    # per scale: zero-variance segments excluded for q <= 0
    excluded_zero: np.ndarray

    def q_index(self, q: float) -> int:
        return find_q(self.q_grid, q)

    def to_frame(self) -> pd.DataFrame:
        qq, ss = np.meshgrid(self.q_grid, self.scales, indexing="ij")
        return pd.DataFrame(
            {"q": qq.ravel(), "s": ss.ravel(), "F": self.fluctuations.ravel()}
        )


def find_q(q_grid: np.ndarray, q: float) -> int:
    hits = np.flatnonzero(np.abs(q_grid - q) < Q_TOLERANCE)
    if hits.size == 0:
        raise QNotOnGrid(f"q={q:g} is not on the grid [{q_grid[0]:g}, {q_grid[-1]:g}]")
    return int(hits[0])


def fluctuation_surface(
    profile: np.ndarray, scales: Sequence[int], q_grid: Sequence[float], p: int
) -> FluctuationSurface:
    q = np.asarray(q_grid, dtype=float)
    s_arr = np.asarray(scales, dtype=int)
    log_f = np.empty((q.size, s_arr.size))
    variances = []
    excluded = np.zeros(s_arr.size, dtype=int)
    for j, s in enumerate(s_arr):
        v = segment_variances(profile, int(s), p)
        variances.append(v)
        log_f[:, j], excluded[j] = _log_power_means(v, q)

    if excluded.any():
        logger.warning(
            "excluded %d zero-variance segments from q <= 0 moments", int(excluded.sum())
        )
    breaches = int(np.count_nonzero(np.diff(log_f, axis=0) < -1e-9))
    if breaches:
        logger.warning("F_q(s) decreases in q at %d grid points", breaches)
    return FluctuationSurface(q, s_arr, np.exp(log_f), tuple(variances), excluded)


@dataclass(frozen=True)
class ExponentFit:
    h: float
    stderr: float
    r2: float


def _fit_mask(scales: np.ndarray, fit_range: Optional[Tuple[int, int]]) -> np.ndarray:
    mask = np.ones(scales.size, dtype=bool)
    if fit_range is not None:
        mask = (scales >= fit_range[0]) & (scales <= fit_range[1])
    if np.count_nonzero(mask) < MIN_FIT_SCALES:
        raise InsufficientScales(
            f"{np.count_nonzero(mask)} scales inside the fit range, need {MIN_FIT_SCALES}"
        )
    return mask


def _loglog_fit(log_s: np.ndarray, log_f: np.ndarray) -> ExponentFit:
    fit = stats.linregress(log_s, log_f)
    # linregress reports r = 0 for a flat line, which the power law fits exactly
    r2 = 1.0 if np.ptp(log_f) == 0.0 else fit.rvalue**2
    return ExponentFit(float(fit.slope), float(fit.stderr), float(r2))


def ghe_fit(
    surface: FluctuationSurface,
    q: float,
    fit_range: Optional[Tuple[int, int]] = None,
) -> ExponentFit:
    """Unweighted OLS of ln F_q(s) on ln s; the slope is h(q)."""
    mask = _fit_mask(surface.scales, fit_range)
    fq = surface.fluctuations[surface.q_index(q), mask]
    return _loglog_fit(np.log(surface.scales[mask]), np.log(fq))


@dataclass(frozen=True)
class GheCurve:
    """Generalized Hurst exponents h(q) over the q-grid, with fit diagnostics."""

    q: np.ndarray
    h: np.ndarray
    stderr: np.ndarray
    r2: np.ndarray
    config: MfdfaConfig
    scales: np.ndarray
    n: int
    surface: Optional[FluctuationSurface] = None

    def index(self, q: float) -> int:
        return find_q(self.q, q)

    def h_at(self, q: float) -> float:
        return float(self.h[self.index(q)])

    @property
    def h2(self) -> float:
        return self.h_at(2.0)

    @property
    def h2_stderr(self) -> float:
        return float(self.stderr[self.index(2.0)])

    @property
    def quality(self) -> Quality:
        if np.any(np.diff(self.h) > MONOTONICITY_TOLERANCE):
            return Quality.suspect
        return Quality.ok

    def tau(self) -> np.ndarray:
        """Mass exponent tau(q) = q h(q) - 1."""
        return self.q * self.h - 1.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"q": self.q, "h": self.h, "stderr": self.stderr, "r2": self.r2})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, n: int = 0) -> "GheCurve":
        """Rebuild a curve from an exported `q,h,stderr,r2` table (no surface)."""
        missing = {"q", "h"} - set(frame.columns)
        if missing:
            raise UsageError(f"GHE table lacks columns {sorted(missing)}", module="spectrum")
        frame = frame.sort_values("q")
        q = frame["q"].to_numpy(float)
        size = q.size
        stderr = frame["stderr"].to_numpy(float) if "stderr" in frame else np.zeros(size)
        r2 = frame["r2"].to_numpy(float) if "r2" in frame else np.ones(size)
        config = MfdfaConfig(q_grid=list(q))
        return cls(q, frame["h"].to_numpy(float), stderr, r2, config, np.array([], int), n)

    @classmethod
    def constant(cls, value: float, config: Optional[MfdfaConfig] = None) -> "GheCurve":
        """A monofractal curve with h(q) = value everywhere."""
        config = config or MfdfaConfig()
        q = np.asarray(config.q_grid, dtype=float)
        zeros = np.zeros(q.size)
        return cls(q, np.full(q.size, float(value)), zeros, np.ones(q.size), config, np.array([], int), 0)


def mfdfa(series: ArrayLike, config: Optional[MfdfaConfig] = None) -> GheCurve:
    """Estimate h(q) for every q of `config.q_grid`.

    Deterministic for fixed input and config.
    """
    config = config or MfdfaConfig()
    x = _values(series)
    n = x.size
    smallest = config.scales[0] if config.scales else config.s_min
    if n < 4 * smallest:
        raise SeriesTooShort(
            f"series of length {n} is shorter than 4 x smallest scale {smallest}",
            module="mfdfa",
        )
    scales = config.resolve_scales(n)
    if np.ptp(x) == 0.0:
        raise DegenerateSeries("constant input has a zero profile")

    y = profile(x)
    surface = fluctuation_surface(y, scales, config.q_grid, config.detrend_order)
    mask = _fit_mask(scales, config.fit_range)
    log_s = np.log(scales[mask])
    fits = [_loglog_fit(log_s, row) for row in np.log(surface.fluctuations[:, mask])]
    curve = GheCurve(
        q=surface.q_grid,
        h=np.array([f.h for f in fits]),
        stderr=np.array([f.stderr for f in fits]),
        r2=np.array([f.r2 for f in fits]),
        config=config,
        scales=scales,
        n=n,
        surface=surface,
    )
    if not np.all(np.isfinite(curve.h)):
        raise DegenerateSeries("non-finite h(q) estimate")
    if curve.quality == Quality.suspect:
        logger.warning("h(q) is not monotone within %.2f; curve flagged suspect", MONOTONICITY_TOLERANCE)
    return curve
