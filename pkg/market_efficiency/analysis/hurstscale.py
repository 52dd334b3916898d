# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

"""Finite-sample correction of the Hurst exponent.

A Hurst exponent measured on a volatility proxy built from n samples follows
H2(n) = H2 * n / (n + a1), where H2 is the n -> infinity value. Absolute
returns are the n = 1 proxy, so with a1 = 3 the asymptotic value is 4 * H2(1).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from ..errors import (
    InvalidA1,
    NonConvergence,
    ParseError,
    PriceFileNotFound,
    SingularFit,
    UsageError,
)

logger = logging.getLogger(__name__)

DEFAULT_A1 = 3.0
MAX_ITERATIONS = 200
GRADIENT_TOLERANCE = 1e-10


def apply_correction(h2_measured: float, n: int = 1, a1: float = DEFAULT_A1) -> float:
    """Asymptotic H2 = H2(n) * (n + a1) / n."""
    if not a1 > 0:
        raise InvalidA1(f"a1 must be > 0, got {a1}")
    if n < 1:
        raise UsageError(f"sample size n must be >= 1, got {n}", module="hurstscale")
    return h2_measured * ((n + a1) / n)


def finite_sample_hurst(n, h2_inf: float, a1: float):
    """H2(n) = H2 * n / (n + a1); vectorized over `n`."""
    n = np.asarray(n, dtype=float)
    return h2_inf * n / (n + a1)


@dataclass(frozen=True)
class ScalingFit:
    h2_inf: float
    a1: float
    residual_norm: float
    points: Tuple[Tuple[int, float], ...]
    iterations: int

    def predict(self, n) -> np.ndarray:
        return finite_sample_hurst(n, self.h2_inf, self.a1)


def fit_scaling(points: Sequence[Tuple[int, float]]) -> ScalingFit:
    """Damped least-squares fit of (H2, a1) to measured (n, H2(n)) pairs.

    Starts from H2 = max observed H2(n) and a1 = 3; Levenberg-Marquardt with
    at most 200 iterations and gradient tolerance 1e-10.
    """
    if any(not float(n).is_integer() for n, _ in points):
        raise UsageError("sample sizes must be whole numbers", module="hurstscale")
    pts: List[Tuple[int, float]] = [(int(n), float(h)) for n, h in points]
    if len(pts) < 2:
        raise SingularFit(f"need >= 2 points, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    h = np.array([p[1] for p in pts], dtype=float)
    if np.any(n < 1):
        raise UsageError("sample sizes must be >= 1", module="hurstscale")
    if not np.all(np.isfinite(h)):
        raise UsageError("measured H2(n) must be finite", module="hurstscale")
    if np.any(h <= 0):
        raise UsageError("measured H2(n) must be > 0", module="hurstscale")
    if np.unique(n).size < 2:
        raise SingularFit("all sample sizes are equal; H2 and a1 are not identifiable")

    def residuals(theta: np.ndarray) -> np.ndarray:
        return finite_sample_hurst(n, theta[0], theta[1]) - h

    def jacobian(theta: np.ndarray) -> np.ndarray:
        h2_inf, a1 = theta
        return np.column_stack([n / (n + a1), -h2_inf * n / (n + a1) ** 2])

    x0 = np.array([h.max(), DEFAULT_A1])
    result = optimize.least_squares(
        residuals,
        x0,
        jac=jacobian,
        method="lm",
        gtol=GRADIENT_TOLERANCE,
        xtol=1e-15,
        ftol=1e-15,
        max_nfev=MAX_ITERATIONS,
    )
    if result.status <= 0:
        raise NonConvergence(f"no convergence after {result.nfev} evaluations: {result.message}")

    h2_inf, a1 = (float(v) for v in result.x)
    if not a1 > 0 or not 0 < h2_inf < 1:
        raise NonConvergence(f"fit left the admissible region: H2={h2_inf:g}, a1={a1:g}")
    logger.info("fitted H2=%.6g a1=%.6g after %d evaluations", h2_inf, a1, result.nfev)
    return ScalingFit(
        h2_inf=h2_inf,
        a1=a1,
        residual_norm=float(np.linalg.norm(result.fun)),
        points=tuple(pts),
        iterations=int(result.nfev),
    )


def read_points_csv(path) -> List[Tuple[int, float]]:
    """`n,h2` rows; `n` must be a whole number and `h2` a finite number."""
    path = Path(path)
    if not path.is_file():
        raise PriceFileNotFound(f"no such points file: {path}", module="hurstscale")
    frame = pd.read_csv(path)
    missing = {"n", "h2"} - set(frame.columns)
    if missing:
        raise UsageError(f"{path}: missing columns {sorted(missing)}", module="hurstscale")
    n = pd.to_numeric(frame["n"], errors="coerce").to_numpy(float)
    h2 = pd.to_numeric(frame["h2"], errors="coerce").to_numpy(float)
    for column, values in (("n", n), ("h2", h2)):
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise ParseError(int(bad[0]) + 1, column, "not a finite number")
    fractional = np.flatnonzero(n != np.round(n))
    if fractional.size:
        row = int(fractional[0])
        raise ParseError(row + 1, "n", f"sample size must be a whole number, got {n[row]:g}")
    return [(int(k), float(h)) for k, h in zip(n, h2)]
