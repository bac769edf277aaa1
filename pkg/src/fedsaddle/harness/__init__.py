"""Experiment harness: configs, presets, runner, CLI."""
from .config import ExperimentConfig, SweepSpec, build_problem, validate_experiment, validate_sweep
from .presets import experiment_preset, preset_names, sweep_preset
from .runner import CSV_HEADER, emit_plots, run_experiment, run_sweep

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "SweepSpec",
    "build_problem",
    "emit_plots",
    "experiment_preset",
    "preset_names",
    "run_experiment",
    "run_sweep",
    "sweep_preset",
    "validate_experiment",
    "validate_sweep",
]
