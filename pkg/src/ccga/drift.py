"""One-step parameter drifts: exact enumeration, closed forms, bound checks.

The enumeration oracle walks every ordered sample pair with its exact rational
probability and applies the exact selection rule, so it is an independent
ground truth against which the closed-form drift expressions and their lower
bounds are compared.  Monte Carlo estimation covers state spaces beyond the
enumeration cap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import objectives
from .model import GridParams, RandomStream
from .objectives import Kind, LinearCategoricalObjective

ENUMERATION_CAP = 10**6

DRIFT_TOLERANCE = 1e-12


class EnumerationCapExceeded(ValueError):
    """The outcome-pair space is too large to enumerate; use Monte Carlo."""


@dataclass(frozen=True)
class DriftTable:
    """Expected one-step changes E[theta'[d,k] - theta[d,k] | theta].

    entries[d][k] (0-based) is the expected change; exact Fractions from the
    enumeration oracle, floats from Monte Carlo.  move_prob[d][k] is the
    probability that the entry changes at all.  Every row of entries sums to
    zero: the update moves one grid unit from one category to another.
    """

    entries: tuple[tuple, ...]
    move_prob: tuple[tuple, ...] | None
    method: str
    stderr: tuple[tuple[float, ...], ...] | None = None

    @property
    def D(self) -> int:
        return len(self.entries)

    @property
    def K(self) -> int:
        return len(self.entries[0])

    def entry(self, d: int, k: int):
        """Drift of theta[d, k], 1-based indices."""
        return self.entries[d - 1][k - 1]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def csv_rows(self) -> list[tuple]:
        """(d, k, drift, move_prob, method) rows, 1-based indices."""
        rows = []
        for d in range(self.D):
            for k in range(self.K):
                mp = self.move_prob[d][k] if self.move_prob is not None else ""
                rows.append((
                    d + 1, k + 1,
                    float(self.entries[d][k]),
                    float(mp) if mp != "" else "",
                    self.method,
                ))
        return rows


def _solution_values(obj: LinearCategoricalObjective) -> dict[tuple, int]:
    """Exact objective value for every solution, keyed by 0-based categories."""
    values = {}
    for cats in itertools.product(range(obj.K), repeat=obj.D):
        x = objectives.OneHotSolution(tuple(c + 1 for c in cats))
        values[cats] = objectives.evaluate_exact(obj, x)
    return values


def brute_force_drift(
    params: GridParams,
    obj: LinearCategoricalObjective,
    cap: int = ENUMERATION_CAP,
) -> DriftTable:
    """Exact drift by enumerating all K^(2D) ordered sample pairs.

    Each pair (x, x') is weighted by prod_d theta[d, x_d] * theta[d, x'_d];
    the better sample wins, ties keep the draw order (x wins); the winner's
    category gains eta and the loser's loses eta in every differing dimension.
    """
    D, K = params.D, params.K
    if K ** (2 * D) > cap:
        raise EnumerationCapExceeded(
            f"K^(2D) = {K ** (2 * D)} pairs exceeds cap {cap}; use Monte Carlo"
        )
    eta = params.resolution.eta
    grid = params.resolution.grid
    theta = [
        [Fraction(int(params.counts[d, k]), grid) for k in range(K)]
        for d in range(D)
    ]
    values = _solution_values(obj)

    drift = [[Fraction(0)] * K for _ in range(D)]
    move = [[Fraction(0)] * K for _ in range(D)]
    solutions = list(itertools.product(range(K), repeat=D))
    probs = {
        cats: math.prod((theta[d][c] for d, c in enumerate(cats)), start=Fraction(1))
        for cats in solutions
    }
    for x in solutions:
        px = probs[x]
        if px == 0:
            continue
        for x2 in solutions:
            p = px * probs[x2]
            if p == 0:
                continue
            w, l = (x, x2) if values[x] >= values[x2] else (x2, x)
            for d in range(D):
                if w[d] != l[d]:
                    drift[d][w[d]] += p * eta
                    drift[d][l[d]] -= p * eta
                    move[d][w[d]] += p
                    move[d][l[d]] += p
    return DriftTable(
        entries=tuple(tuple(row) for row in drift),
        move_prob=tuple(tuple(row) for row in move),
        method="enumeration",
    )


def monte_carlo_drift(
    params: GridParams,
    obj: LinearCategoricalObjective,
    n_samples: int,
    stream: RandomStream,
) -> DriftTable:
    """Drift estimated from n_samples simulated update steps.

    Converges to the enumeration oracle at rate ~1/sqrt(n); per-entry
    standard errors are reported alongside the estimates.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    D, K = params.D, params.K
    grid = params.resolution.grid
    eta = 1.0 / grid
    cats = _draw_category_pairs(params, n_samples, stream)
    values = _solution_values(obj)

    delta = np.zeros((n_samples, D, K))
    moved = np.zeros((n_samples, D, K))
    for i in range(n_samples):
        a = tuple(int(c) for c in cats[i, 0])
        b = tuple(int(c) for c in cats[i, 1])
        w, l = (a, b) if values[a] >= values[b] else (b, a)
        for d in range(D):
            if w[d] != l[d]:
                delta[i, d, w[d]] += eta
                delta[i, d, l[d]] -= eta
                moved[i, d, w[d]] = 1.0
                moved[i, d, l[d]] = 1.0
    mean = delta.mean(axis=0)
    se = delta.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 else (
        np.zeros((D, K))
    )
    return DriftTable(
        entries=tuple(tuple(row) for row in mean.tolist()),
        move_prob=tuple(tuple(row) for row in moved.mean(axis=0).tolist()),
        method="monte-carlo",
        stderr=tuple(tuple(row) for row in se.tolist()),
    )


def _draw_category_pairs(
    params: GridParams, n: int, stream: RandomStream
) -> np.ndarray:
    """(n, 2, D) array of 0-based sampled categories."""
    grid = params.resolution.grid
    u = stream.integers(0, grid, size=(n, 2, params.D))
    cums = np.cumsum(params.counts, axis=1)
    return np.argmax(u[:, :, :, None] < cums[None, None, :, :], axis=3)


def _preceding_collision_product(params: GridParams, d: int) -> Fraction:
    """prod over dimensions before d (1-based) of sum_k theta[d', k]^2.

    The probability that two independent samples agree on every dimension
    before d; the empty product (d = 1) is 1.
    """
    grid = params.resolution.grid
    out = Fraction(1)
    for j in range(d - 1):
        out *= Fraction(
            int(sum(int(c) ** 2 for c in params.counts[j])), grid * grid
        )
    return out


def kval_closed_form_drift(params: GridParams, d: int) -> float:
    """Drift of theta[d, 1] under KVal:
    2 * eta * theta[d,1] * (1 - theta[d,1]) * prod_{j<d} sum_k theta[j,k]^2.

    Evaluated in exact rational arithmetic, converted to float at the end.
    """
    eta = params.resolution.eta
    t1 = params.theta(d, 1)
    return float(2 * eta * t1 * (1 - t1) * _preceding_collision_product(params, d))


def com_drift_bound_check(
    params: GridParams,
    d: int,
    tolerance: float = DRIFT_TOLERANCE,
    cap: int = ENUMERATION_CAP,
    n_samples: int = 10**5,
    stream: RandomStream | None = None,
) -> dict:
    """Check the COM drift lower bound
    drift(theta[d,1]) >= eta * Pr(theta[d,1] moves) / (4 * sqrt(D - 1)).

    Both sides come from the same oracle (enumeration when it fits under the
    cap, Monte Carlo otherwise).  Requires D >= 2: the bound's normalization
    sqrt(D - 1) degenerates at D = 1.
    """
    if params.D < 2:
        raise ValueError("COM drift bound requires D >= 2")
    obj = objectives.com(params.D, params.K)
    try:
        table = brute_force_drift(params, obj, cap=cap)
    except EnumerationCapExceeded:
        if stream is None:
            raise
        table = monte_carlo_drift(params, obj, n_samples, stream)
    eta = float(params.resolution.eta)
    lhs = float(table.entry(d, 1))
    rhs = eta * float(table.move_prob[d - 1][0]) / (4.0 * math.sqrt(params.D - 1))
    return {"lhs": lhs, "rhs": rhs, "holds": lhs >= rhs - tolerance}


def kval_ratio_drift_check(
    params: GridParams,
    d: int,
    k: int,
    tolerance: float = DRIFT_TOLERANCE,
    cap: int = ENUMERATION_CAP,
) -> dict:
    """Check the KVal ratio drift lower bound for X[d,k] = 2*theta[d,1] - theta[d,k]:
    drift(X[d,k]) >= 2*eta*(X*(1 - theta[d,1] - theta[d,k]) + 3*theta[d,1]*theta[d,k])
                     * prod_{j<d} sum_i theta[j,i]^2.

    k >= 2 (the ratio guards a suboptimal category against the first one).
    lhs comes from the enumeration oracle.
    """
    if k < 2:
        raise ValueError("ratio check needs a suboptimal category, k >= 2")
    obj = objectives.kval(params.D, params.K)
    table = brute_force_drift(params, obj, cap=cap)
    lhs = float(2 * table.entry(d, 1) - table.entry(d, k))
    eta = params.resolution.eta
    t1 = params.theta(d, 1)
    tk = params.theta(d, k)
    x = 2 * t1 - tk
    rhs = float(
        2 * eta * (x * (1 - t1 - tk) + 3 * t1 * tk)
        * _preceding_collision_product(params, d)
    )
    return {"lhs": lhs, "rhs": rhs, "holds": lhs >= rhs - tolerance}


def delta_statistics(params: GridParams, n_samples: int, stream: RandomStream) -> dict:
    """Empirical statistics of delta = sum_d (x[d,1] - x'[d,1]) over sample pairs.

    delta is the COM score difference between two independent samples from the
    current distribution.  Returns empirical Pr(delta = 0) and E|delta| with
    their standard errors.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    cats = _draw_category_pairs(params, n_samples, stream)
    first = (cats == 0).sum(axis=2)  # (n, 2) counts of first categories
    delta = first[:, 0] - first[:, 1]
    zero = (delta == 0).astype(np.float64)
    abs_delta = np.abs(delta).astype(np.float64)
    p_zero = float(zero.mean())
    mean_abs = float(abs_delta.mean())
    if n_samples > 1:
        p_zero_se = float(zero.std(ddof=1) / math.sqrt(n_samples))
        mean_abs_se = float(abs_delta.std(ddof=1) / math.sqrt(n_samples))
    else:
        p_zero_se = mean_abs_se = 0.0
    return {
        "p_zero_hat": p_zero,
        "mean_abs_hat": mean_abs,
        "p_zero_se": p_zero_se,
        "mean_abs_se": mean_abs_se,
    }


def random_params(
    D: int, resolution, stream: RandomStream, interior: bool = False
) -> GridParams:
    """A random grid state: each row is a uniform composition of the grid total.

    With interior=True every count is kept strictly positive (requires
    grid >= K), which is the regime the drift bound formulas address.
    """
    grid = resolution.grid
    K = resolution.K
    counts = np.empty((D, K), dtype=np.int64)
    base = 1 if interior else 0
    budget = grid - base * K
    if budget < 0:
        raise ValueError("grid too small for an interior state")
    for d in range(D):
        # stars and bars via sorted cut points
        cuts = np.sort(stream.integers(0, budget + 1, size=K - 1))
        parts = np.diff(np.concatenate(([0], cuts, [budget])))
        counts[d] = parts + base
    return GridParams(resolution, counts)
