"""Optimizer drivers, hyperparameters, schedules, and run records."""
from .drivers import (
    centralized_sgda,
    fedsgda_m,
    fedsgda_plus,
    local_sgda,
    local_sgda_plus,
    momentum_local_sgda,
)
from .params import HyperParams
from .records import RecordingOptions, RunRecord, Trajectory
from .schedules import theorem_schedule_ncc, theorem_schedule_ncpl

ALGORITHMS = {
    "fedsgda_m": fedsgda_m,
    "fedsgda_plus": fedsgda_plus,
    "local_sgda": local_sgda,
    "local_sgda_plus": local_sgda_plus,
    "momentum_local_sgda": momentum_local_sgda,
    "centralized_sgda": centralized_sgda,
}

__all__ = [
    "ALGORITHMS",
    "HyperParams",
    "RecordingOptions",
    "RunRecord",
    "Trajectory",
    "centralized_sgda",
    "fedsgda_m",
    "fedsgda_plus",
    "local_sgda",
    "local_sgda_plus",
    "momentum_local_sgda",
    "theorem_schedule_ncc",
    "theorem_schedule_ncpl",
]
