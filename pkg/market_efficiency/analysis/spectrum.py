# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..datatypes import Q_TOLERANCE
from ..errors import GridTooSmall, QZero
from .mfdfa import GheCurve, find_q

logger = logging.getLogger(__name__)

# default order of the strength measures
DEFAULT_ORDER = 5.0
F_ALPHA_TOLERANCE = 1e-6
EFFICIENT_HURST = 0.5


@dataclass(frozen=True)
class AlphaCurve:
    """Hoelder exponents alpha(q) and the singularity spectrum f(alpha).

    Interior points use central differences of h(q); the two grid endpoints
    use one-sided differences and are marked in `edge`.
    """

    q: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    edge: np.ndarray

    def index(self, q: float) -> int:
        return find_q(self.q, q)

    def alpha_at(self, q: float) -> float:
        return float(self.alpha[self.index(q)])

    @property
    def width(self) -> float:
        return float(self.alpha.max() - self.alpha.min())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"q": self.q, "alpha": self.alpha, "f": self.f, "edge": self.edge})


def singularity_spectrum(curve: GheCurve) -> AlphaCurve:
    """alpha = h(q) + q h'(q) and f(alpha) = q [alpha - h(q)] + 1."""
    q = np.asarray(curve.q, dtype=float)
    if q.size < 3:
        raise GridTooSmall(f"the spectrum needs >= 3 q points, got {q.size}")
    steps = np.diff(q)
    if not np.allclose(steps, steps[0], atol=Q_TOLERANCE, rtol=0.0):
        raise GridTooSmall("the q-grid must be uniformly spaced")

    h = np.asarray(curve.h, dtype=float)
    h_prime = np.gradient(h, steps[0])
    alpha = h + q * h_prime
    f = q * (alpha - h) + 1.0
    edge = np.zeros(q.size, dtype=bool)
    edge[[0, -1]] = True

    if np.any(f > 1.0 + F_ALPHA_TOLERANCE):
        logger.debug("f(alpha) exceeds 1 at %d points", int(np.count_nonzero(f > 1.0 + F_ALPHA_TOLERANCE)))
    return AlphaCurve(q, alpha, f, edge)


def delta_h(curve: GheCurve, q: float = DEFAULT_ORDER) -> float:
    """Width of h(q): h(-q) - h(q). Negative values are legitimate."""
    if abs(q) < Q_TOLERANCE:
        raise QZero("delta_h is undefined at q = 0")
    return curve.h_at(-q) - curve.h_at(q)


def delta_alpha(alpha: AlphaCurve, q: float = DEFAULT_ORDER) -> float:
    """Width of the singularity spectrum: alpha(-q) - alpha(q)."""
    if abs(q) < Q_TOLERANCE:
        raise QZero("delta_alpha is undefined at q = 0")
    return alpha.alpha_at(-q) - alpha.alpha_at(q)


@dataclass(frozen=True)
class MdmResult:
    value: float
    # h(-q) > 0.5 > h(q): the measure equals delta_h / 2
    reduces_to_half_delta_h: bool


def mdm(curve: GheCurve, q: float = DEFAULT_ORDER) -> MdmResult:
    """Market deficiency measure: mean absolute deviation of h(+-q) from 0.5."""
    h_neg, h_pos = curve.h_at(-q), curve.h_at(q)
    reduces = h_neg > EFFICIENT_HURST > h_pos
    if reduces:
        # identical expression to delta_h so the identity holds bit for bit
        return MdmResult((h_neg - h_pos) / 2, True)
    value = 0.5 * (abs(h_neg - EFFICIENT_HURST) + abs(EFFICIENT_HURST - h_pos))
    return MdmResult(value, False)


def strength_frame(
    curve: GheCurve,
    alpha: Optional[AlphaCurve] = None,
    orders: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """delta_h, delta_alpha and MDM for every positive order on the grid."""
    alpha = alpha or singularity_spectrum(curve)
    if orders is None:
        orders = [q for q in curve.q if q > Q_TOLERANCE]
    records = [
        {
            "q": float(q),
            "delta_h": delta_h(curve, q),
            "delta_alpha": delta_alpha(alpha, q),
            "mdm": mdm(curve, q).value,
        }
        for q in orders
    ]
    return pd.DataFrame.from_records(records, columns=["q", "delta_h", "delta_alpha", "mdm"])


def spectrum_frame(curve: GheCurve, alpha: Optional[AlphaCurve] = None) -> pd.DataFrame:
    """alpha.csv layout with the mass exponent tau(q) appended."""
    alpha = alpha or singularity_spectrum(curve)
    frame = alpha.to_frame()
    frame["tau"] = curve.tau()
    return frame
