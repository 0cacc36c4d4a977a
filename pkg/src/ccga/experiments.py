"""Sweep runner: runtime statistics across (D, K) grids, bound overlays,
event frequencies, and slope regression against the theoretical bounds.

Trials are deterministic given the master seed: every trial derives its own
random stream from (master, D, K, trial), so results are independent of
execution order and worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .engine import RunConfig, ordering_threshold_set, run_trial
from .model import RandomStream

# Named constants from the runtime theorems, reported as metadata next to the
# unit-constant overlays (the overlays drop constants, as the reference
# figures do; the proved constants are acknowledged loose).
THEOREM_CONSTANTS = {
    "com_upper_c3": 0.5,      # tail constant in the COM upper bound
    "kval_upper_c1": 512.0,   # leading constant in the KVal upper bound
    "kval_upper_c2": 32.0,    # tail constant in the KVal upper bound
    "lower_c3": 1.0 / 12.0,   # leading constant in the lower bound
    "lower_c4": 0.5,          # tail constant in the lower bound
}

DEFAULT_ALPHA = 0.5


def default_m_com(D: int, K: int) -> int:
    """Default learning-rate parameter for COM: m = ceil(sqrt(D) * ln(D*K)),
    so 1/eta = m*K."""
    _check(D, K)
    return math.ceil(math.sqrt(D) * math.log(D * K))


def default_m_kval(D: int, K: int) -> int:
    """Default learning-rate parameter for KVal:
    m = ceil(D * K * ln(K) * ln(D*K))."""
    _check(D, K)
    return math.ceil(D * K * math.log(K) * math.log(D * K))


def bound_com(D: int, K: int, m: int) -> float:
    """Runtime bound shape for COM with unit constant: sqrt(D)*ln(D*K)/eta."""
    _check(D, K)
    return math.sqrt(D) * math.log(D * K) * (m * K)


def bound_kval(D: int, K: int, m: int) -> float:
    """Runtime bound shape for KVal with unit constant: D*ln(K)/eta."""
    _check(D, K)
    return D * math.log(K) * (m * K)


def _check(D: int, K: int) -> None:
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")


@dataclass(frozen=True)
class SweepSpec:
    objective: str  # "com" | "kval"
    D_values: tuple[int, ...]
    K_values: tuple[int, ...]
    trials: int = 100
    eta_rule: str = "default"  # "default" | "explicit"
    explicit_m: int | None = None
    budget_multiplier: float | None = None  # default: 20 for COM, 10 for KVal
    master_seed: int = 0
    threshold_alpha: float = DEFAULT_ALPHA
    track_events: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "D_values", tuple(self.D_values))
        object.__setattr__(self, "K_values", tuple(self.K_values))
        if self.objective not in ("com", "kval"):
            raise ValueError(f"objective must be com or kval, got {self.objective!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.eta_rule not in ("default", "explicit"):
            raise ValueError(f"unknown eta rule {self.eta_rule!r}")
        if self.eta_rule == "explicit" and self.explicit_m is None:
            raise ValueError("explicit eta rule requires explicit_m")
        if self.multiplier < 1:
            raise ValueError("budget multiplier must be >= 1")

    @property
    def multiplier(self) -> float:
        if self.budget_multiplier is not None:
            return self.budget_multiplier
        return 20.0 if self.objective == "com" else 10.0

    def m_for(self, D: int, K: int) -> int:
        if self.eta_rule == "explicit":
            return self.explicit_m
        return default_m_com(D, K) if self.objective == "com" else default_m_kval(D, K)

    def bound_for(self, D: int, K: int, m: int) -> float:
        return bound_com(D, K, m) if self.objective == "com" else bound_kval(D, K, m)


@dataclass(frozen=True)
class TrialRecord:
    D: int
    K: int
    m: int
    trial: int
    seed_key: str
    hit: bool
    t_hit: int | None
    iterations: int
    cross_product: int | None
    cross_sum_offset: int | None
    cross_product_pow_d: int | None
    cross_sum_scaled: int | None
    first_low_optimal: int | None
    first_ratio_violation: int | None
    optimal_sum_monotone: bool


@dataclass(frozen=True)
class CellStats:
    D: int
    K: int
    m: int
    trials: int
    success_rate: float
    t_min: float
    t_q25: float
    t_median: float
    t_q75: float
    t_max: float
    t_mean: float
    bound: float
    median_bound_ratio: float
    freq_low_optimal: float
    freq_ratio_violation: float


def run_cell_trial(
    objective: str,
    D: int,
    K: int,
    m: int,
    master_seed: int,
    trial: int,
    max_iterations: int,
    alpha: float,
    track_events: bool,
) -> TrialRecord:
    """One sweep trial with its deterministically derived stream."""
    config = RunConfig(
        D=D, K=K, m=m,
        objective_kind=objective,
        seed=master_seed,
        max_iterations=max_iterations,
        stop_at_first_hit=True,
        thresholds=ordering_threshold_set(alpha),
        track_events=track_events,
    )
    stream = RandomStream.derive(master_seed, D, K, trial)
    result = run_trial(config, stream=stream, engine="fast")
    tc = result.threshold_crossings
    return TrialRecord(
        D=D, K=K, m=m, trial=trial,
        seed_key=f"{master_seed}/{D}/{K}/{trial}",
        hit=result.hit,
        t_hit=result.t_hit,
        iterations=result.iterations_executed,
        cross_product=tc["product_alpha"],
        cross_sum_offset=tc["sum_offset_alpha"],
        cross_product_pow_d=tc["product_alpha_pow_d"],
        cross_sum_scaled=tc["sum_alpha_d"],
        first_low_optimal=result.first_low_optimal,
        first_ratio_violation=result.first_ratio_violation,
        optimal_sum_monotone=result.optimal_sum_monotone,
    )


def _run_cell_trial_packed(args: tuple) -> TrialRecord:
    return run_cell_trial(*args)


def run_sweep(
    spec: SweepSpec, jobs: int = 1
) -> tuple[list[TrialRecord], list[CellStats]]:
    """Run the full (D, K) grid; returns raw trial records and cell summaries.

    Deterministic for a given master seed regardless of jobs: each trial's
    stream is derived from (master, D, K, trial) and results are aggregated in
    grid order.
    """
    tasks = []
    for D in spec.D_values:
        for K in spec.K_values:
            m = spec.m_for(D, K)
            budget = math.ceil(spec.multiplier * spec.bound_for(D, K, m))
            for trial in range(spec.trials):
                tasks.append((
                    spec.objective, D, K, m, spec.master_seed, trial,
                    budget, spec.threshold_alpha, spec.track_events,
                ))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell_trial_packed, tasks, chunksize=4))
    else:
        records = [run_cell_trial(*t) for t in tasks]
    cells = summarize(spec, records)
    return records, cells


def summarize(spec: SweepSpec, records: list[TrialRecord]) -> list[CellStats]:
    """Aggregate trial records into per-cell statistics, in grid order.

    Hitting times of unsuccessful trials enter the quantiles censored at the
    iteration budget.  Aggregation is order-insensitive: records are grouped
    by (D, K) and sorted by trial index.
    """
    by_cell: dict[tuple[int, int], list[TrialRecord]] = {}
    for rec in records:
        by_cell.setdefault((rec.D, rec.K), []).append(rec)
    cells = []
    for D in spec.D_values:
        for K in spec.K_values:
            rows = sorted(by_cell.get((D, K), []), key=lambda r: r.trial)
            if not rows:
                continue
            m = rows[0].m
            times = np.array([
                r.t_hit if r.hit else r.iterations for r in rows
            ], dtype=np.float64)
            bound = spec.bound_for(D, K, m)
            median = float(np.quantile(times, 0.5))
            n = len(rows)
            cells.append(CellStats(
                D=D, K=K, m=m, trials=n,
                success_rate=sum(r.hit for r in rows) / n,
                t_min=float(times.min()),
                t_q25=float(np.quantile(times, 0.25)),
                t_median=median,
                t_q75=float(np.quantile(times, 0.75)),
                t_max=float(times.max()),
                t_mean=float(times.mean()),
                bound=bound,
                median_bound_ratio=median / bound,
                freq_low_optimal=sum(
                    r.first_low_optimal is not None for r in rows
                ) / n,
                freq_ratio_violation=sum(
                    r.first_ratio_violation is not None for r in rows
                ) / n,
            ))
    return cells


def slope_regression(cells: list[CellStats], axis: str = "K") -> dict:
    """Least-squares fit of log(median runtime) against log(bound value)
    across cells varying along the given axis ("K" or "D")."""
    if axis not in ("K", "D"):
        raise ValueError(f"axis must be K or D, got {axis!r}")
    if len(cells) < 3:
        raise ValueError(f"need >= 3 cells for a slope, got {len(cells)}")
    x = np.log([c.bound for c in cells])
    y = np.log([c.t_median for c in cells])
    if float(np.ptp(x)) == 0.0:
        raise ValueError("degenerate regression: bound values do not vary")
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


TRIAL_COLUMNS = (
    "D", "K", "m", "trial", "seed_key", "hit", "t_hit", "iterations",
    "cross_product", "cross_sum_offset", "cross_product_pow_d",
    "cross_sum_scaled", "first_low_optimal", "first_ratio_violation",
    "optimal_sum_monotone",
)

CELL_COLUMNS = (
    "D", "K", "m", "trials", "success_rate", "t_min", "t_q25", "t_median",
    "t_q75", "t_max", "t_mean", "bound", "median_bound_ratio",
    "freq_low_optimal", "freq_ratio_violation",
)


def _cell_value(v):
    return "" if v is None else v


def write_trials_csv(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRIAL_COLUMNS)
        for r in records:
            w.writerow([_cell_value(getattr(r, c)) for c in TRIAL_COLUMNS])


def write_cells_csv(path, cells: list[CellStats]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CELL_COLUMNS)
        for c in cells:
            w.writerow([getattr(c, col) for col in CELL_COLUMNS])


def write_overlay_csv(path, cells: list[CellStats]) -> None:
    """Bound-overlay table: enough to regenerate runtime-vs-bound plots."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(("D", "K", "bound", "median"))
        for c in cells:
            w.writerow((c.D, c.K, c.bound, c.t_median))


def read_trials_csv(path) -> list[TrialRecord]:
    def parse_opt(s):
        return None if s == "" else int(s)

    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            records.append(TrialRecord(
                D=int(row["D"]), K=int(row["K"]), m=int(row["m"]),
                trial=int(row["trial"]), seed_key=row["seed_key"],
                hit=row["hit"] == "True",
                t_hit=parse_opt(row["t_hit"]),
                iterations=int(row["iterations"]),
                cross_product=parse_opt(row["cross_product"]),
                cross_sum_offset=parse_opt(row["cross_sum_offset"]),
                cross_product_pow_d=parse_opt(row["cross_product_pow_d"]),
                cross_sum_scaled=parse_opt(row["cross_sum_scaled"]),
                first_low_optimal=parse_opt(row["first_low_optimal"]),
                first_ratio_violation=parse_opt(row["first_ratio_violation"]),
                optimal_sum_monotone=row["optimal_sum_monotone"] == "True",
            ))
    return records


def write_manifest(path, spec: SweepSpec, jobs: int, version: str) -> None:
    """Machine-readable record of what produced a sweep's outputs."""
    payload = {
        "spec": asdict(spec),
        "jobs": jobs,
        "version": version,
        "theorem_constants": THEOREM_CONSTANTS,
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
