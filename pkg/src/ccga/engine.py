"""ccGA main loop with hitting-time detection and per-iteration observers.

Two interchangeable implementations share one draw protocol (two uniform
integers in [0, m*K) per dimension per iteration, first sample then second):

* a pure-Python reference engine that supports every objective and records
  potential traces, and
* a numba fast path for COM/KVal used by the sweep runner.

Identical (seed, config) produce identical trajectories on either path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels, objectives, potentials
from .model import (
    GridParams,
    OneHotSolution,
    RandomStream,
    Resolution,
    init_params,
)
from .objectives import Kind, LinearCategoricalObjective

DRAW_BLOCK = 4096

THRESHOLD_KINDS = (
    "product",        # prod_d theta[d,1] >= alpha
    "sum-offset",     # sum_d theta[d,1] >= D - 1 + alpha
    "product-pow-d",  # prod_d theta[d,1] >= alpha**D
    "sum-scaled",     # sum_d theta[d,1] >= alpha * D
)


@dataclass(frozen=True)
class ThresholdSpec:
    """Named first-crossing observer on theta^(t), checked before sampling."""

    name: str
    kind: str
    alpha: float

    def __post_init__(self) -> None:
        if self.kind not in THRESHOLD_KINDS:
            raise ValueError(f"unknown threshold kind {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def ordering_threshold_set(alpha: float) -> tuple[ThresholdSpec, ...]:
    """The four product/sum threshold observers used by the ordering checks."""
    return (
        ThresholdSpec("product_alpha", "product", alpha),
        ThresholdSpec("sum_offset_alpha", "sum-offset", alpha),
        ThresholdSpec("product_alpha_pow_d", "product-pow-d", alpha),
        ThresholdSpec("sum_alpha_d", "sum-scaled", alpha),
    )


@dataclass(frozen=True)
class RunConfig:
    D: int
    K: int
    m: int
    objective_kind: str = "com"
    custom_weights: tuple[tuple[int, ...], ...] | None = None
    seed: int = 0
    max_iterations: int = 10_000
    stop_at_first_hit: bool = True
    record_trace_every: int | None = None
    thresholds: tuple[ThresholdSpec, ...] = ()
    track_events: bool = True
    initial_counts: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.objective_kind not in ("com", "kval", "custom"):
            raise ValueError(f"unknown objective kind {self.objective_kind!r}")
        if self.objective_kind == "custom" and self.custom_weights is None:
            raise ValueError("custom objective requires custom_weights")
        if self.record_trace_every is not None and self.record_trace_every < 1:
            raise ValueError("record_trace_every must be >= 1")

    def resolution(self) -> Resolution:
        return Resolution(self.K, self.m)

    def objective(self) -> LinearCategoricalObjective:
        if self.objective_kind == "com":
            return objectives.com(self.D, self.K)
        if self.objective_kind == "kval":
            return objectives.kval(self.D, self.K)
        return objectives.custom(self.custom_weights)

    def initial_params(self) -> GridParams:
        if self.initial_counts is None:
            return init_params(self.D, self.resolution())
        return GridParams(self.resolution(), np.array(self.initial_counts))


@dataclass
class RunResult:
    hit: bool
    t_hit: int | None
    iterations_executed: int
    threshold_crossings: dict[str, int | None]
    first_low_optimal: int | None
    first_ratio_violation: int | None
    optimal_sum_monotone: bool
    final_params: GridParams
    traces: dict[str, np.ndarray] | None = field(default=None)


def _threshold_tables(
    thresholds: tuple[ThresholdSpec, ...], D: int, grid: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compile threshold specs into kernel tables.

    Sum thresholds are exact integers (smallest count total satisfying the
    condition, computed with rational arithmetic).  Product thresholds are
    log-space floats compared with a guard band.
    """
    kinds = np.empty(len(thresholds), dtype=np.int64)
    flogs = np.zeros(len(thresholds), dtype=np.float64)
    ints = np.zeros(len(thresholds), dtype=np.int64)
    for i, spec in enumerate(thresholds):
        alpha = Fraction(spec.alpha)
        if spec.kind == "product":
            kinds[i] = _kernels.THR_LOG_PRODUCT
            flogs[i] = (-math.inf if spec.alpha == 0.0
                        else math.log(spec.alpha) + D * math.log(grid))
        elif spec.kind == "product-pow-d":
            kinds[i] = _kernels.THR_LOG_PRODUCT
            flogs[i] = (-math.inf if spec.alpha == 0.0
                        else D * math.log(spec.alpha) + D * math.log(grid))
        elif spec.kind == "sum-offset":
            kinds[i] = _kernels.THR_INT_SUM
            ints[i] = math.ceil((D - 1 + alpha) * grid)
        else:  # sum-scaled
            kinds[i] = _kernels.THR_INT_SUM
            ints[i] = math.ceil(alpha * D * grid)
    return kinds, flogs, ints


def run_trial(
    config: RunConfig,
    stream: RandomStream | None = None,
    engine: str = "auto",
) -> RunResult:
    """Run one ccGA trial.

    Per iteration t: evaluate threshold observers on theta^(t); draw the two
    samples; record t_hit if either equals the optimum (hit detection happens
    at sampling time, before selection and update); select with ties keeping
    the draw order; apply the update; track events on the post-update state.
    The loop stops at the first hit unless configured to continue, and is
    censored at max_iterations.
    """
    if stream is None:
        stream = RandomStream(config.seed)
    if engine not in ("auto", "reference", "fast"):
        raise ValueError(f"unknown engine {engine!r}")
    fast_ok = config.objective_kind in ("com", "kval") and (
        config.record_trace_every is None
    )
    if engine == "fast" and not fast_ok:
        raise ValueError("fast engine supports only COM/KVal without traces")
    if engine == "reference" or not fast_ok:
        return _run_reference(config, stream)
    return _run_fast(config, stream)


def _run_fast(config: RunConfig, stream: RandomStream) -> RunResult:
    params = config.initial_params()
    counts = params.counts.copy()
    grid = params.resolution.grid
    code = (_kernels.OBJECTIVE_COM if config.objective_kind == "com"
            else _kernels.OBJECTIVE_KVAL)

    kinds, flogs, ints = _threshold_tables(config.thresholds, config.D, grid)
    crossed = np.full(len(config.thresholds), -1, dtype=np.int64)
    state_i = np.zeros(_kernels.STATE_I_LEN, dtype=np.int64)
    state_i[_kernels.SI_T_HIT] = -1
    state_i[_kernels.SI_FIRST_LOW] = -1
    state_i[_kernels.SI_FIRST_RATIO] = -1
    state_i[_kernels.SI_SUM_FIRST] = int(counts[:, 0].sum())
    fstate = np.array([_kernels.log_product_of_first(counts)], dtype=np.float64)

    t = 0
    while state_i[_kernels.SI_DONE] == 0:
        block = min(DRAW_BLOCK, config.max_iterations - t)
        if block <= 0:
            break
        draws = stream.integers(0, grid, size=(block, 2, config.D))
        t = _kernels.run_block(
            counts, config.m, code, draws, t,
            config.max_iterations, config.stop_at_first_hit,
            config.track_events,
            kinds, flogs, ints, crossed, state_i, fstate,
        )

    final = GridParams(params.resolution, counts)
    _final_threshold_check(
        config.thresholds, kinds, flogs, ints, crossed, final,
        int(state_i[_kernels.SI_ITERATIONS]),
    )
    return RunResult(
        hit=bool(state_i[_kernels.SI_HIT]),
        t_hit=int(state_i[_kernels.SI_T_HIT]) if state_i[_kernels.SI_HIT] else None,
        iterations_executed=int(state_i[_kernels.SI_ITERATIONS]),
        threshold_crossings={
            spec.name: (int(c) if c >= 0 else None)
            for spec, c in zip(config.thresholds, crossed)
        },
        first_low_optimal=(int(state_i[_kernels.SI_FIRST_LOW])
                           if state_i[_kernels.SI_FIRST_LOW] >= 0 else None),
        first_ratio_violation=(int(state_i[_kernels.SI_FIRST_RATIO])
                               if state_i[_kernels.SI_FIRST_RATIO] >= 0 else None),
        optimal_sum_monotone=not bool(state_i[_kernels.SI_MONOTONE_VIOLATED]),
        final_params=final,
    )


def _final_threshold_check(thresholds, kinds, flogs, ints, crossed, params, t_final):
    """Also examine theta^(t_final): a crossing reached by the very last
    update would otherwise go unrecorded."""
    if len(thresholds) == 0:
        return
    sum_first = int(params.counts[:, 0].sum())
    log_prod = _kernels.log_product_of_first(params.counts)
    for i in range(len(thresholds)):
        if crossed[i] >= 0:
            continue
        if kinds[i] == _kernels.THR_INT_SUM:
            if sum_first >= ints[i]:
                crossed[i] = t_final
        else:
            if log_prod >= flogs[i] - _kernels.LOG_GUARD:
                crossed[i] = t_final


def _run_reference(config: RunConfig, stream: RandomStream) -> RunResult:
    params = config.initial_params()
    counts = params.counts.copy()
    res = params.resolution
    grid = res.grid
    D, K, m = config.D, config.K, config.m
    obj = config.objective()

    kinds, flogs, ints = _threshold_tables(config.thresholds, D, grid)
    crossed = [-1] * len(config.thresholds)

    hit = False
    t_hit = None
    first_low = None
    first_ratio = None
    monotone = True
    iterations = 0

    tracing = config.record_trace_every is not None
    trace_rows: list[tuple] = []

    cums = np.empty((D, K), dtype=np.int64)

    def check_thresholds(t: int) -> None:
        sum_first = int(counts[:, 0].sum())
        log_prod = _kernels.log_product_of_first(counts)
        for i in range(len(config.thresholds)):
            if crossed[i] >= 0:
                continue
            if kinds[i] == _kernels.THR_INT_SUM:
                if sum_first >= ints[i]:
                    crossed[i] = t
            else:
                if log_prod >= flogs[i] - _kernels.LOG_GUARD:
                    crossed[i] = t

    def record_trace(t: int) -> None:
        snap = GridParams(res, counts.copy())
        if config.objective_kind == "kval":
            trace_rows.append((
                t,
                potentials.kval_potential(snap),
                potentials.kval_legacy(snap),
                float(counts[:, 0].sum() / grid),
                float(np.exp(_kernels.log_product_of_first(counts))),
            ))
        else:
            trace_rows.append((
                t,
                tuple(potentials.onemax_potential(snap, d + 1) for d in range(D)),
                tuple(potentials.onemax_legacy(snap, d + 1) for d in range(D)),
                float(counts[:, 0].sum() / grid),
                float(np.exp(_kernels.log_product_of_first(counts))),
            ))

    t = 0
    while t < config.max_iterations:
        check_thresholds(t)
        if tracing and t % config.record_trace_every == 0:
            record_trace(t)

        u = stream.integers(0, grid, size=(2, D))
        np.cumsum(counts, axis=1, out=cums)
        cats = np.argmax(u[:, :, None] < cums[None, :, :], axis=2)
        iterations = t + 1

        if not hit and (np.all(cats[0] == 0) or np.all(cats[1] == 0)):
            hit = True
            t_hit = t
            if config.stop_at_first_hit:
                break

        x = OneHotSolution(tuple(int(c) + 1 for c in cats[0]))
        x2 = OneHotSolution(tuple(int(c) + 1 for c in cats[1]))
        cmp = objectives.compare(obj, x, x2)
        wrow, lrow = (cats[0], cats[1]) if cmp >= 0 else (cats[1], cats[0])

        sum_before = int(counts[:, 0].sum())
        for d in range(D):
            cw, cl = int(wrow[d]), int(lrow[d])
            if cw == cl:
                continue
            counts[d, cw] += 1
            counts[d, cl] -= 1
            if config.track_events:
                if cl == 0 and first_low is None and 2 * counts[d, 0] <= m:
                    first_low = t + 1
                if first_ratio is None:
                    if cl == 0:
                        if np.any(2 * counts[d, 0] < counts[d, 1:]):
                            first_ratio = t + 1
                    elif cw != 0 and 2 * counts[d, 0] < counts[d, cw]:
                        first_ratio = t + 1
        if config.objective_kind == "com" and int(counts[:, 0].sum()) < sum_before:
            monotone = False
        t += 1

    final = GridParams(res, counts)
    crossed_arr = np.array(crossed, dtype=np.int64)
    _final_threshold_check(
        config.thresholds, kinds, flogs, ints, crossed_arr, final, iterations
    )

    traces = None
    if tracing:
        traces = _assemble_traces(trace_rows, config.objective_kind, D)

    return RunResult(
        hit=hit,
        t_hit=t_hit,
        iterations_executed=iterations,
        threshold_crossings={
            spec.name: (int(c) if c >= 0 else None)
            for spec, c in zip(config.thresholds, crossed_arr)
        },
        first_low_optimal=first_low,
        first_ratio_violation=first_ratio,
        optimal_sum_monotone=monotone,
        final_params=final,
        traces=traces,
    )


def _assemble_traces(rows: list[tuple], objective_kind: str, D: int):
    ts = np.array([r[0] for r in rows], dtype=np.int64)
    out: dict[str, np.ndarray] = {"t": ts}
    if objective_kind == "kval":
        out["kval_potential"] = np.array([r[1] for r in rows])
        out["kval_legacy"] = np.array([r[2] for r in rows])
    else:
        out["onemax_potential"] = np.array([r[1] for r in rows])
        out["onemax_legacy"] = np.array([r[2] for r in rows])
    out["optimal_sum"] = np.array([r[3] for r in rows])
    out["optimal_product"] = np.array([r[4] for r in rows])
    return out
