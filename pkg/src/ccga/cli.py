"""Command-line front end: deterministic runs, sweeps, and check suites.

Configuration comes from an optional JSON file plus flags; flags override
file values, unknown config keys are rejected, and the effective
configuration is echoed into the emitted manifest.  Outputs are flat files
(CSV with a header row, JSON manifests) under --output-dir, the
CCGA_OUTPUT_DIR environment variable, or the working directory.

Exit codes: 0 all checks passed / run completed; 1 a check failed;
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__, drift, experiments, objectives, theorylab
from .engine import RunConfig, ordering_threshold_set, run_trial
from .model import RandomStream, Resolution
from .theorylab import PRESETS


class ConfigError(ValueError):
    """Bad configuration: unknown key, wrong type, or invalid value."""


def _load_config(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown config keys: {', '.join(unknown)}; allowed: "
            f"{', '.join(sorted(allowed))}"
        )
    return data


def _merged(config: dict, args: argparse.Namespace, keys: tuple[str, ...]) -> dict:
    """Start from config-file values; any flag given on the command line wins."""
    out = dict(config)
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _output_dir(args: argparse.Namespace) -> Path:
    if args.output_dir is not None:
        d = Path(args.output_dir)
    elif os.environ.get("CCGA_OUTPUT_DIR"):
        d = Path(os.environ["CCGA_OUTPUT_DIR"])
    else:
        d = Path.cwd()
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------- run

RUN_KEYS = (
    "D", "K", "m", "objective", "seed", "max_iterations",
    "stop_at_first_hit", "threshold_alpha", "track_events", "engine",
)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _merged(_load_config(args.config, set(RUN_KEYS)), args, RUN_KEYS)
    for key in ("D", "K", "m"):
        if key not in cfg:
            raise ConfigError(f"run requires {key} (flag --{key} or config)")
    alpha = cfg.get("threshold_alpha", experiments.DEFAULT_ALPHA)
    config = RunConfig(
        D=int(cfg["D"]), K=int(cfg["K"]), m=int(cfg["m"]),
        objective_kind=cfg.get("objective", "com"),
        seed=int(cfg.get("seed", 0)),
        max_iterations=int(cfg.get("max_iterations", 10_000_000)),
        stop_at_first_hit=bool(cfg.get("stop_at_first_hit", True)),
        thresholds=ordering_threshold_set(float(alpha)),
        track_events=bool(cfg.get("track_events", True)),
    )
    result = run_trial(config, engine=cfg.get("engine", "auto"))
    payload = {
        "config": {k: v for k, v in asdict(config).items() if k != "thresholds"},
        "threshold_alpha": alpha,
        "hit": result.hit,
        "t_hit": result.t_hit,
        "iterations_executed": result.iterations_executed,
        "threshold_crossings": result.threshold_crossings,
        "first_low_optimal": result.first_low_optimal,
        "first_ratio_violation": result.first_ratio_violation,
        "optimal_sum_monotone": result.optimal_sum_monotone,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------- sweep

SWEEP_KEYS = (
    "objective", "D_values", "K_values", "trials", "eta_rule", "explicit_m",
    "budget_multiplier", "master_seed", "threshold_alpha", "track_events",
    "prefix",
)


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _merged(_load_config(args.config, set(SWEEP_KEYS)), args, SWEEP_KEYS)
    for key in ("objective", "D_values", "K_values", "master_seed"):
        if key not in cfg:
            raise ConfigError(f"sweep requires {key}")
    spec = experiments.SweepSpec(
        objective=cfg["objective"],
        D_values=tuple(int(v) for v in cfg["D_values"]),
        K_values=tuple(int(v) for v in cfg["K_values"]),
        trials=int(cfg.get("trials", 100)),
        eta_rule=cfg.get("eta_rule", "default"),
        explicit_m=cfg.get("explicit_m"),
        budget_multiplier=cfg.get("budget_multiplier"),
        master_seed=int(cfg["master_seed"]),
        threshold_alpha=float(cfg.get("threshold_alpha", experiments.DEFAULT_ALPHA)),
        track_events=bool(cfg.get("track_events", True)),
    )
    out = _output_dir(args)
    prefix = cfg.get("prefix", f"{spec.objective}_sweep")
    records, cells = experiments.run_sweep(spec, jobs=args.jobs)
    experiments.write_trials_csv(out / f"{prefix}_trials.csv", records)
    experiments.write_cells_csv(out / f"{prefix}_cells.csv", cells)
    experiments.write_overlay_csv(out / f"{prefix}_overlay.csv", cells)
    experiments.write_manifest(
        out / f"{prefix}_manifest.json", spec, args.jobs, __version__
    )
    for cell in cells:
        print(
            f"D={cell.D} K={cell.K} m={cell.m}: success={cell.success_rate:.3f} "
            f"median={cell.t_median:.0f} bound={cell.bound:.0f} "
            f"ratio={cell.median_bound_ratio:.3f}"
        )
    print(f"wrote {prefix}_{{trials,cells,overlay}}.csv and manifest to {out}")
    return 0


# ------------------------------------------------------- potential-trace

TRACE_KEYS = (
    "D", "K", "m", "objective", "seed", "max_iterations", "stride",
    "stop_at_first_hit", "prefix",
)


def _cmd_potential_trace(args: argparse.Namespace) -> int:
    cfg = _merged(_load_config(args.config, set(TRACE_KEYS)), args, TRACE_KEYS)
    for key in ("D", "K", "m"):
        if key not in cfg:
            raise ConfigError(f"potential-trace requires {key}")
    objective = cfg.get("objective", "com")
    config = RunConfig(
        D=int(cfg["D"]), K=int(cfg["K"]), m=int(cfg["m"]),
        objective_kind=objective,
        seed=int(cfg.get("seed", 0)),
        max_iterations=int(cfg.get("max_iterations", 100_000)),
        stop_at_first_hit=bool(cfg.get("stop_at_first_hit", False)),
        record_trace_every=int(cfg.get("stride", 1)),
    )
    result = run_trial(config, engine="reference")
    out = _output_dir(args)
    prefix = cfg.get("prefix", f"{objective}_trace")
    path = out / f"{prefix}.csv"
    traces = result.traces
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        if objective == "kval":
            w.writerow(("t", "kval_potential", "kval_legacy"))
            for i, t in enumerate(traces["t"]):
                w.writerow((
                    int(t),
                    float(traces["kval_potential"][i]),
                    float(traces["kval_legacy"][i]),
                ))
        else:
            w.writerow(("t", "d", "onemax_potential", "onemax_legacy"))
            for i, t in enumerate(traces["t"]):
                for d in range(config.D):
                    w.writerow((
                        int(t), d + 1,
                        float(traces["onemax_potential"][i][d]),
                        float(traces["onemax_legacy"][i][d]),
                    ))
    print(f"hit={result.hit} t_hit={result.t_hit} "
          f"iterations={result.iterations_executed}")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------- drift-check

DRIFT_KEYS = ("states", "seed", "D_max", "K_max", "m", "delta_samples")


def _cmd_drift_check(args: argparse.Namespace) -> int:
    cfg = _merged(_load_config(args.config, set(DRIFT_KEYS)), args, DRIFT_KEYS)
    n_states = int(cfg.get("states", 100))
    seed = int(cfg.get("seed", 0))
    d_max = int(cfg.get("D_max", 3))
    k_max = int(cfg.get("K_max", 3))
    m = int(cfg.get("m", 5))
    delta_samples = int(cfg.get("delta_samples", 100_000))
    stream = RandomStream.derive(seed, 7)
    failures = 0
    rows = []

    # closed-form KVal drift vs the enumeration oracle
    worst = 0.0
    for i in range(n_states):
        D = 1 + int(stream.integers(0, d_max))
        K = 2 + int(stream.integers(0, k_max - 1))
        params = drift.random_params(D, Resolution(K, m), stream)
        table = drift.brute_force_drift(params, objectives.kval(D, K))
        for d in range(1, D + 1):
            gap = abs(
                drift.kval_closed_form_drift(params, d) - float(table.entry(d, 1))
            )
            worst = max(worst, gap)
    ok = worst <= drift.DRIFT_TOLERANCE
    rows.append(("kval-closed-form-vs-oracle", ok, f"max |gap| = {worst:.3e}"))
    failures += not ok

    # COM drift lower bound
    bad = 0
    for i in range(n_states // 2 or 1):
        D = 2 + int(stream.integers(0, d_max - 1))
        K = 2 + int(stream.integers(0, k_max - 1))
        params = drift.random_params(D, Resolution(K, m), stream)
        for d in range(1, D + 1):
            if not drift.com_drift_bound_check(params, d)["holds"]:
                bad += 1
    rows.append(("com-drift-lower-bound", bad == 0, f"{bad} violations"))
    failures += bad > 0

    # KVal ratio drift lower bound
    bad = 0
    for i in range(n_states // 2 or 1):
        D = 1 + int(stream.integers(0, d_max))
        K = 3 if k_max >= 3 else 2
        params = drift.random_params(D, Resolution(K, m), stream)
        for d in range(1, D + 1):
            for k in range(2, K + 1):
                if not drift.kval_ratio_drift_check(params, d, k)["holds"]:
                    bad += 1
    rows.append(("kval-ratio-drift-lower-bound", bad == 0, f"{bad} violations"))
    failures += bad > 0

    # sample-difference statistics against their distribution-free bounds
    from .model import init_params

    bad = 0
    for D in (4, 16):
        params = init_params(D, Resolution(2, m))
        stats = drift.delta_statistics(params, delta_samples, stream)
        p_floor = 1.0 / (4.0 * D ** 0.5) - 3.0 * stats["p_zero_se"]
        abs_ceil = (D / 2.0) ** 0.5 + 3.0 * stats["mean_abs_se"]
        if stats["p_zero_hat"] < p_floor or stats["mean_abs_hat"] > abs_ceil:
            bad += 1
    rows.append(("delta-statistics-bounds", bad == 0, f"{bad} violations"))
    failures += bad > 0

    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if failures == 0 else 1


# -------------------------------------------------------- theorem-check

THEOREM_KEYS = ("trials", "seed", "presets", "prefix")


def _cmd_theorem_check(args: argparse.Namespace) -> int:
    cfg = _merged(_load_config(args.config, set(THEOREM_KEYS)), args, THEOREM_KEYS)
    seed = int(cfg.get("seed", 0))
    trials = cfg.get("trials")
    names = cfg.get("presets", sorted(PRESETS))
    unknown = sorted(set(names) - set(PRESETS))
    if unknown:
        raise ConfigError(
            f"unknown presets: {', '.join(unknown)}; "
            f"available: {', '.join(sorted(PRESETS))}"
        )
    out = _output_dir(args)
    prefix = cfg.get("prefix", "theorems")
    failures = 0
    rows = []
    for idx, name in enumerate(sorted(names)):
        scenario = PRESETS[name]
        if trials is not None:
            from dataclasses import replace

            scenario = replace(scenario, trials=int(trials))
        report = theorylab.simulate_tail(
            scenario, RandomStream.derive(seed, 1000 + idx)
        )
        rows.append(report.csv_row(name, scenario))
        failures += not report.holds
        print(
            f"{'PASS' if report.holds else 'FAIL'}  {name} (theorem "
            f"{report.theorem_id}): empirical={report.empirical:.5f} "
            f"+/- {report.stderr:.5f}, bound={report.bound:.5f}"
        )
    path = out / f"{prefix}_report.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow((
            "preset", "theorem", "kind", "m", "c", "epsilon", "n", "trials",
            "self_loop_prob", "event_break_prob", "empirical", "stderr",
            "bound", "holds",
        ))
        w.writerows(rows)
    print(f"wrote {path}")
    return 0 if failures == 0 else 1


# -------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccga",
        description="Simulation and analysis toolkit for the categorical "
        "compact genetic algorithm.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--output-dir", help="output directory "
                       "(default: $CCGA_OUTPUT_DIR or the working directory)")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes (results are identical for any value)")

    p = sub.add_parser("run", help="single trial, result as JSON")
    common(p)
    p.add_argument("--D", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--objective", choices=("com", "kval"))
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--engine", choices=("auto", "reference", "fast"))
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="(D, K) grid of trials, CSV outputs")
    common(p)
    p.add_argument("--objective", choices=("com", "kval"))
    p.add_argument("--D-values", dest="D_values", type=int, nargs="+")
    p.add_argument("--K-values", dest="K_values", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--budget-multiplier", dest="budget_multiplier", type=float)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--prefix")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("potential-trace",
                       help="one trial with potential recording, CSV output")
    common(p)
    p.add_argument("--D", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--objective", choices=("com", "kval"))
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--prefix")
    p.set_defaults(func=_cmd_potential_trace)

    p = sub.add_parser("drift-check", help="drift oracle and bound checks")
    common(p)
    p.add_argument("--states", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.set_defaults(func=_cmd_drift_check)

    p = sub.add_parser("theorem-check", help="tail-bound presets, pass/fail")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--presets", nargs="+")
    p.add_argument("--prefix")
    p.set_defaults(func=_cmd_theorem_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
