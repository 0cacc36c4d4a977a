"""Potential functions of the distribution parameter.

Two families: the ratio/log potentials driving the runtime bounds, and the
legacy linear potentials (1 - theta) used for side-by-side trace figures.
Branch decisions are exact integer comparisons on the grid counts; the only
approximate step is the final float conversion.  On the grid, theta in
(0, eta) is unreachable (counts are integers), so the sub-eta branch fires
only at theta == 0 exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .model import GridParams


def onemax_potential(params: GridParams, d: int) -> float:
    """(1 - theta[d,1]) / theta[d,1], clamped to (1 - eta)/eta at theta = 0.

    d is 1-based.  Always >= 0; zero iff theta[d,1] = 1.
    """
    n = int(params.counts[d - 1, 0])
    grid = params.resolution.grid
    if n == 0:  # theta < eta is reachable only at exactly 0
        return float(Fraction(grid - 1, 1))  # (1 - eta)/eta = m*K - 1
    return float(Fraction(grid - n, n))


def kval_potential(params: GridParams) -> float:
    """sum_d X_d + D*ln(K) with X_d = ln(theta[d,1]), clamped to ln(eta) at 0.

    Zero at the uniform initialization; maximum D*ln(K) iff all theta[d,1] = 1.
    """
    grid = params.resolution.grid
    total = 0.0
    for n in params.counts[:, 0]:
        n = int(n)
        total += -math.log(grid) if n == 0 else math.log(n / grid)
    return total + params.D * math.log(params.K)


def onemax_legacy(params: GridParams, d: int) -> float:
    """1 - theta[d,1], the classic cGA potential (d 1-based)."""
    return float(Fraction(params.resolution.grid - int(params.counts[d - 1, 0]),
                          params.resolution.grid))


def kval_legacy(params: GridParams) -> float:
    """-sum_d (1 - theta[d,1]), the negative of the classic cGA potential."""
    grid = params.resolution.grid
    deficit = sum(grid - int(n) for n in params.counts[:, 0])
    return -float(Fraction(deficit, grid))
