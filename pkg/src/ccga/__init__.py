"""Simulation and empirical-analysis toolkit for the categorical compact
genetic algorithm (ccGA): exact grid dynamics, drift oracles, tail-bound
validation, and reproducible runtime sweeps."""

__version__ = "0.1.0"

from .engine import RunConfig, RunResult, ThresholdSpec, ordering_threshold_set, run_trial
from .model import (
    GridParams,
    InvariantViolation,
    OneHotSolution,
    RandomStream,
    Resolution,
    apply_update,
    init_params,
    sample,
)
from .objectives import LinearCategoricalObjective, com, custom, kval

__all__ = [
    "GridParams",
    "InvariantViolation",
    "LinearCategoricalObjective",
    "OneHotSolution",
    "RandomStream",
    "Resolution",
    "RunConfig",
    "RunResult",
    "ThresholdSpec",
    "apply_update",
    "com",
    "custom",
    "init_params",
    "kval",
    "ordering_threshold_set",
    "run_trial",
    "sample",
    "__version__",
]
