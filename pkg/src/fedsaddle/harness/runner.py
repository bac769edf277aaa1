"""Experiment and sweep execution with CSV emission.

The CSV is the output contract; plots are a convenience on top of it.
Row schema (one row per recorded aggregation round):

    algo,seed,iter,comm_rounds,samples,grad_phi,moreau,gap,objective,task_metric,drift

Unavailable metrics are empty fields.  Floats are written with repr so the
files are byte-identical across repeated runs of the same config.
"""
import csv
import itertools
import json
import os

from .. import kernels
from ..algorithms import ALGORITHMS
from .config import (
    apply_overrides,
    build_problem,
    recording_options,
    resolved_echo,
    resolve_hyperparams,
    validate_experiment,
)

CSV_HEADER = ["algo", "seed", "iter", "comm_rounds", "samples", "grad_phi",
              "moreau", "gap", "objective", "task_metric", "drift"]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):  # includes numpy scalars
        return repr(float(value))
    return str(value)


def trajectory_rows(traj):
    for r in traj.records:
        yield [
            traj.algo, traj.seed, r.iter, r.comm_rounds, r.samples_total,
            _fmt(r.stat_ncsc), _fmt(r.stat_ncc), _fmt(r.gap),
            _fmt(r.objective), _fmt(r.task_metric), _fmt(r.drift),
        ]


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def run_experiment(cfg, output_dir=None):
    """Run every (algorithm, seed) pair; returns {algorithm: [Trajectory]}.

    When an output directory is given, writes summary.csv plus the fully
    resolved config echo.
    """
    if isinstance(cfg, dict):
        cfg = validate_experiment(cfg)
    problem = build_problem(cfg.problem)
    hp = resolve_hyperparams(cfg.hyperparams, problem)
    opts = recording_options(cfg.record)
    out = {}
    for algo in cfg.algorithms:
        hp_algo = hp.replace(**cfg.per_algorithm[algo]) if algo in cfg.per_algorithm else hp
        out[algo] = [ALGORITHMS[algo](problem, hp_algo, seed, opts) for seed in cfg.seeds]
    output_dir = output_dir or cfg.output_dir
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        rows = [row for algo in cfg.algorithms for t in out[algo] for row in trajectory_rows(t)]
        write_rows_csv(os.path.join(output_dir, "summary.csv"), CSV_HEADER, rows)
        echo = resolved_echo(cfg, problem, hp, kernels.active_backend())
        with open(os.path.join(output_dir, "config.json"), "w") as fh:
            json.dump(echo, fh, indent=2, sort_keys=True)
    return out


def _final(values):
    vals = [v for v in values if v is not None]
    return vals[-1] if vals else None


def _cell_metrics(trajs):
    import numpy as np

    finals = {"grad_phi": [], "moreau": [], "objective": [], "task_metric": []}
    drift_means, min_grads = [], []
    for t in trajs:
        finals["grad_phi"].append(_final([r.stat_ncsc for r in t.records]))
        finals["moreau"].append(_final([r.stat_ncc for r in t.records]))
        finals["objective"].append(t.records[-1].objective)
        finals["task_metric"].append(_final([r.task_metric for r in t.records]))
        drift_means.append(float(np.mean([r.drift for r in t.records[1:]])) if len(t.records) > 1 else 0.0)
        m = t.min_stat()
        min_grads.append(m)
    out = {}
    for name, vals in finals.items():
        present = [v for v in vals if v is not None]
        out[f"{name}_mean"] = float(np.mean(present)) if present else None
        out[f"{name}_std"] = float(np.std(present)) if present else None
    out["drift_mean"] = float(np.mean(drift_means))
    out["drift_std"] = float(np.std(drift_means))
    present = [v for v in min_grads if v is not None]
    out["min_grad_phi_mean"] = float(np.mean(present)) if present else None
    out["min_grad_phi_std"] = float(np.std(present)) if present else None
    return out

_CELL_COLUMNS = ["grad_phi_mean", "grad_phi_std", "min_grad_phi_mean", "min_grad_phi_std",
                 "moreau_mean", "moreau_std", "objective_mean", "objective_std",
                 "task_metric_mean", "task_metric_std", "drift_mean", "drift_std"]


def run_sweep(sweep, output_dir=None):
    """Cartesian grid over the sweep axes; one experiment per cell.

    Returns (cells, results): cells is the list of {axis: value} dicts in
    execution order, results the matching {algorithm: [Trajectory]} dicts.
    """
    base_raw = {
        "problem": sweep.base.problem,
        "algorithms": sweep.base.algorithms,
        "hyperparams": sweep.base.hyperparams,
        "seeds": sweep.base.seeds,
        "record": sweep.base.record,
    }
    axis_names = list(sweep.axes)
    cells, results = [], []
    for combo in itertools.product(*(sweep.axes[a] for a in axis_names)):
        overrides = dict(zip(axis_names, combo))
        cfg = validate_experiment(apply_overrides(base_raw, overrides))
        cells.append(overrides)
        results.append(run_experiment(cfg))
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        header = axis_names + ["algo", "seeds"] + _CELL_COLUMNS
        rows = []
        for overrides, byalgo in zip(cells, results):
            for algo, trajs in byalgo.items():
                metrics = _cell_metrics(trajs)
                rows.append(
                    [_fmt(overrides[a]) for a in axis_names]
                    + [algo, len(trajs)]
                    + [_fmt(metrics[c]) for c in _CELL_COLUMNS]
                )
        write_rows_csv(os.path.join(output_dir, "sweep.csv"), header, rows)
        with open(os.path.join(output_dir, "sweep_config.json"), "w") as fh:
            json.dump({"base": base_raw, "axes": sweep.axes}, fh, indent=2, sort_keys=True)
    return cells, results


PLOT_KINDS = {
    "stationarity-vs-rounds": ("stat_ncsc", "stat_ncc"),
    "metric-vs-rounds": ("task_metric",),
}


def emit_plots(trajectories, kind, output_dir):
    """One static image per kind, plus the exact plotted series as CSV."""
    if not trajectories:
        raise ValueError("no trajectories to plot")
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}, expected one of {sorted(PLOT_KINDS)}")
    os.makedirs(output_dir, exist_ok=True)
    series = []
    for t in trajectories:
        for name in PLOT_KINDS[kind]:
            pts = [(r.comm_rounds, getattr(r, name)) for r in t.records
                   if getattr(r, name) is not None]
            if pts:
                series.append((t.algo, t.seed, name, pts))
                break
    if not series:
        raise ValueError(f"no data for plot kind {kind!r}")

    csv_path = os.path.join(output_dir, f"{kind}.csv")
    rows = [[algo, seed, name, r, _fmt(v)] for algo, seed, name, pts in series for r, v in pts]
    write_rows_csv(csv_path, ["algo", "seed", "metric", "comm_rounds", "value"], rows)

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("plotting requires matplotlib (pip install fedsaddle[plots])") from exc
    fig, ax = plt.subplots(figsize=(7, 4.5))
    seen = set()
    for algo, seed, name, pts in series:
        xs, ys = zip(*pts)
        label = algo if algo not in seen else None
        seen.add(algo)
        ax.plot(xs, ys, label=label, alpha=0.8)
    ax.set_xlabel("communication rounds")
    ax.set_ylabel({"stationarity-vs-rounds": "stationarity", "metric-vs-rounds": "task metric"}[kind])
    if any(name in ("stat_ncsc", "stat_ncc") for _, _, name, _ in series):
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    img_path = os.path.join(output_dir, f"{kind}.png")
    fig.savefig(img_path, dpi=120)
    plt.close(fig)
    return img_path, csv_path
