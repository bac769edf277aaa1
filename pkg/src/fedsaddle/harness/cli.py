"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical abort (a run hit
a non-finite iterate).  FEDSADDLE_THREADS controls client-step thread count
and FEDSADDLE_BACKEND pins the kernel backend; neither changes results.
"""
import argparse
import json
import sys

from ..errors import ConfigError, NumericalAbort, RunAbort
from . import presets
from .config import load_json, validate_experiment, validate_sweep
from .runner import PLOT_KINDS, emit_plots, run_experiment, run_sweep


def _load_experiment(args):
    if args.preset:
        return validate_experiment(presets.experiment_preset(args.preset))
    if not args.config:
        raise ConfigError("give a config path or --preset")
    return validate_experiment(load_json(args.config))


def _load_sweep(args):
    if args.preset:
        return validate_sweep(presets.sweep_preset(args.preset))
    if not args.config:
        raise ConfigError("give a config path or --preset")
    return validate_sweep(load_json(args.config))


def _cmd_run(args):
    cfg = _load_experiment(args)
    out = run_experiment(cfg, output_dir=args.output or cfg.output_dir)
    for algo, trajs in out.items():
        last = trajs[0].records[-1]
        print(f"{algo}: {len(trajs)} seed(s), {last.comm_rounds} rounds, "
              f"final objective {last.objective:.6g}")
    if args.output or cfg.output_dir:
        print(f"wrote {args.output or cfg.output_dir}/summary.csv")
    return 0


def _cmd_sweep(args):
    sweep = _load_sweep(args)
    cells, _ = run_sweep(sweep, output_dir=args.output)
    print(f"ran {len(cells)} cell(s) over axes {list(sweep.axes)}")
    if args.output:
        print(f"wrote {args.output}/sweep.csv")
    return 0


def _cmd_plot(args):
    import csv as _csv

    from ..algorithms.records import RunRecord, Trajectory

    rows = []
    with open(f"{args.dir}/summary.csv", newline="") as fh:
        for row in _csv.DictReader(fh):
            rows.append(row)
    if not rows:
        raise ConfigError(f"{args.dir}/summary.csv is empty")
    byrun = {}
    for row in rows:
        key = (row["algo"], int(row["seed"]))
        rec = RunRecord(
            iter=int(row["iter"]), samples_total=int(row["samples"]),
            comm_rounds=int(row["comm_rounds"]),
            objective=float(row["objective"]), drift=float(row["drift"]),
            stat_ncsc=float(row["grad_phi"]) if row["grad_phi"] else None,
            stat_ncc=float(row["moreau"]) if row["moreau"] else None,
            gap=float(row["gap"]) if row["gap"] else None,
            task_metric=float(row["task_metric"]) if row["task_metric"] else None,
        )
        byrun.setdefault(key, []).append(rec)
    import numpy as np

    trajs = [
        Trajectory(algo=a, seed=s, records=recs, final_x=np.zeros(1), final_y=np.zeros(1),
                   sampled_x=np.zeros(1), sampled_y=np.zeros(1), sampled_iter=0,
                   y_norm_sq_max=0.0)
        for (a, s), recs in byrun.items()
    ]
    out = args.output or args.dir
    for kind in args.kind:
        img, series = emit_plots(trajs, kind, out)
        print(f"wrote {img} and {series}")
    return 0


def _cmd_validate(args):
    raw = load_json(args.config)
    if "axes" in raw:
        validate_sweep(raw)
        print(f"{args.config}: valid sweep config")
    else:
        validate_experiment(raw)
        print(f"{args.config}: valid experiment config")
    return 0


def _cmd_schedule(args):
    from ..algorithms.schedules import theorem_schedule_ncc, theorem_schedule_ncpl

    if args.kind == "ncpl":
        hp = theorem_schedule_ncpl(kappa=args.kappa, L=args.L, N=args.N,
                                   b=args.b, nu=args.nu, T0=args.T0)
    else:
        hp = theorem_schedule_ncc(L=args.L, N=args.N, T=args.T)
    print(json.dumps(hp.as_dict(), indent=2, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fedsaddle",
        description="Deterministic federated minimax optimization simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", nargs="?", help="path to experiment JSON")
    p_run.add_argument("--preset", choices=sorted(presets.preset_names()["experiments"]))
    p_run.add_argument("-o", "--output", help="output directory")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a grid sweep config")
    p_sweep.add_argument("config", nargs="?", help="path to sweep JSON")
    p_sweep.add_argument("--preset", choices=sorted(presets.preset_names()["sweeps"]))
    p_sweep.add_argument("-o", "--output", help="output directory")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_plot = sub.add_parser("plot", help="plot a results directory")
    p_plot.add_argument("dir", help="directory containing summary.csv")
    p_plot.add_argument("--kind", action="append", choices=sorted(PLOT_KINDS),
                        default=None)
    p_plot.add_argument("-o", "--output")
    p_plot.set_defaults(fn=_cmd_plot)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    p_sched = sub.add_parser("schedule", help="print guarantee-driven hyperparameters")
    sched_sub = p_sched.add_subparsers(dest="kind", required=True)
    p_ncpl = sched_sub.add_parser("ncpl")
    p_ncpl.add_argument("--kappa", type=float, required=True)
    p_ncpl.add_argument("--L", type=float, required=True)
    p_ncpl.add_argument("--N", type=int, required=True)
    p_ncpl.add_argument("--b", type=int, default=1)
    p_ncpl.add_argument("--nu", type=float, default=1.0)
    p_ncpl.add_argument("--T0", type=int, required=True)
    p_ncpl.set_defaults(fn=_cmd_schedule)
    p_ncc = sched_sub.add_parser("ncc")
    p_ncc.add_argument("--L", type=float, required=True)
    p_ncc.add_argument("--N", type=int, required=True)
    p_ncc.add_argument("--T", type=int, required=True)
    p_ncc.set_defaults(fn=_cmd_schedule)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kind", None) is None and args.command == "plot":
        args.kind = ["stationarity-vs-rounds"]
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except RunAbort as exc:
        if isinstance(exc.cause, NumericalAbort):
            print(f"numerical abort: {exc}", file=sys.stderr)
            return 3
        raise


if __name__ == "__main__":
    sys.exit(main())
