"""Declarative experiment configuration: parsing, validation, resolution.

A config is one JSON document; after resolution every numeric field is
explicit (schedules expanded, "auto" constants filled from the problem), so
the echoed copy written next to the outputs reproduces the run byte for
byte.
"""
import copy
import json
from dataclasses import dataclass, field

from ..algorithms import ALGORITHMS, HyperParams, RecordingOptions
from ..algorithms.schedules import theorem_schedule_ncc, theorem_schedule_ncpl
from ..errors import ConfigError
from ..problems import make_auroc_problem, make_fair_problem, make_quadratic_saddle

_PROBLEM_BUILDERS = {
    "quadratic": (
        make_quadratic_saddle,
        {"d1", "d2", "num_clients", "kappa", "mu", "noise_sigma", "zeta", "seed",
         "a_lo", "a_hi", "x_star_norm", "init_grad_norm", "dual_offset"},
    ),
    "fair": (
        make_fair_problem,
        {"n", "num_classes", "feature_dim", "num_clients", "heterogeneity",
         "separation", "seed"},
    ),
    "auroc": (
        make_auroc_problem,
        {"n", "feature_dim", "num_clients", "positive_frac", "separation",
         "heterogeneity", "eval_n", "init_scale", "label_noise", "seed"},
    ),
}

_HP_FIELDS = {"T", "Q", "S", "b", "B", "eta", "c_hat", "c", "eta_x", "eta_y",
              "alpha", "beta", "momentum"}
_RECORD_FIELDS = {"every", "grad_phi", "gap", "moreau", "moreau_lam",
                  "moreau_tol", "task_metric", "store_iterates"}


@dataclass
class ExperimentConfig:
    problem: dict
    algorithms: list
    hyperparams: dict
    seeds: list
    record: dict = field(default_factory=dict)
    per_algorithm: dict = field(default_factory=dict)  # algo -> hp field overrides
    output_dir: str | None = None


@dataclass
class SweepSpec:
    base: ExperimentConfig
    axes: dict  # dotted path (or comma-joined paths) -> list of values


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc), field=str(path)) from exc


def validate_experiment(raw):
    if not isinstance(raw, dict):
        raise ConfigError("experiment config must be an object")
    unknown = set(raw) - {"problem", "algorithm", "algorithms", "hyperparams",
                          "seeds", "record", "per_algorithm", "output_dir"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")

    prob = raw.get("problem")
    if not isinstance(prob, dict) or "family" not in prob:
        raise ConfigError("must be an object with a 'family' key", field="problem")
    if prob["family"] not in _PROBLEM_BUILDERS:
        raise ConfigError(
            f"unknown family {prob['family']!r}, expected one of {sorted(_PROBLEM_BUILDERS)}",
            field="problem.family",
        )
    allowed = _PROBLEM_BUILDERS[prob["family"]][1]
    bad = set(prob) - allowed - {"family"}
    if bad:
        raise ConfigError(f"unknown parameters {sorted(bad)}", field="problem")

    algos = raw.get("algorithms", raw.get("algorithm"))
    if isinstance(algos, str):
        algos = [algos]
    if not algos:
        raise ConfigError("missing 'algorithm' or 'algorithms'", field="algorithm")
    for a in algos:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}, expected one of {sorted(ALGORITHMS)}",
                              field="algorithm")

    hp = raw.get("hyperparams")
    if not isinstance(hp, dict):
        raise ConfigError("must be an object", field="hyperparams")
    if "schedule" in hp:
        if hp["schedule"] not in ("ncpl", "ncc"):
            raise ConfigError("schedule must be 'ncpl' or 'ncc'", field="hyperparams.schedule")
    else:
        bad = set(hp) - _HP_FIELDS
        if bad:
            raise ConfigError(f"unknown fields {sorted(bad)}", field="hyperparams")
        if "T" not in hp:
            raise ConfigError("T is required", field="hyperparams.T")

    seeds = raw.get("seeds")
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("must be a nonempty list of integers", field="seeds")

    record = raw.get("record", {})
    bad = set(record) - _RECORD_FIELDS
    if bad:
        raise ConfigError(f"unknown fields {sorted(bad)}", field="record")

    per_algo = raw.get("per_algorithm", {})
    for algo, over in per_algo.items():
        if algo not in algos:
            raise ConfigError(f"{algo!r} not among the configured algorithms",
                              field="per_algorithm")
        bad = set(over) - _HP_FIELDS
        if bad:
            raise ConfigError(f"unknown fields {sorted(bad)}", field=f"per_algorithm.{algo}")

    return ExperimentConfig(
        problem=prob, algorithms=list(algos), hyperparams=hp,
        seeds=list(seeds), record=dict(record), per_algorithm=dict(per_algo),
        output_dir=raw.get("output_dir"),
    )


def validate_sweep(raw):
    if not isinstance(raw, dict) or "base" not in raw or "axes" not in raw:
        raise ConfigError("sweep config needs 'base' and 'axes'")
    base = validate_experiment(raw["base"])
    axes = raw["axes"]
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("must be a nonempty object of path -> values", field="axes")
    for key, vals in axes.items():
        if not isinstance(vals, list) or not vals:
            raise ConfigError("axis values must be a nonempty list", field=f"axes.{key}")
    return SweepSpec(base=base, axes=dict(axes))


def build_problem(spec):
    builder, _ = _PROBLEM_BUILDERS[spec["family"]]
    kwargs = {k: v for k, v in spec.items() if k != "family"}
    try:
        return builder(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field="problem") from exc


def _auto(spec, key, value):
    got = spec.get(key, "auto")
    if got == "auto":
        if value is None:
            raise ConfigError(f"no exact value available; give {key} explicitly",
                              field=f"hyperparams.{key}")
        return value
    return got


def resolve_hyperparams(spec, problem):
    if "schedule" not in spec:
        return HyperParams(**{k: v for k, v in spec.items() if k in _HP_FIELDS}).validate()
    kind = spec["schedule"]
    if kind == "ncpl":
        return theorem_schedule_ncpl(
            kappa=_auto(spec, "kappa", getattr(problem, "kappa", None)),
            L=_auto(spec, "L", problem.lips_const),
            N=_auto(spec, "N", problem.num_clients),
            b=spec.get("b", 1),
            nu=spec.get("nu", 1.0),
            T0=spec["T0"] if "T0" in spec else _missing("T0"),
        )
    return theorem_schedule_ncc(
        L=_auto(spec, "L", problem.lips_const),
        N=_auto(spec, "N", problem.num_clients),
        T=spec["T"] if "T" in spec else _missing("T"),
    )


def _missing(key):
    raise ConfigError(f"{key} is required for this schedule", field=f"hyperparams.{key}")


def recording_options(record):
    return RecordingOptions(**record)


def resolved_echo(cfg, problem, hp, backend):
    """Fully explicit config for byte-identical reproduction."""
    return {
        "problem": dict(cfg.problem),
        "algorithms": list(cfg.algorithms),
        "hyperparams": hp.as_dict(),
        "per_algorithm": dict(cfg.per_algorithm),
        "seeds": list(cfg.seeds),
        "record": dict(cfg.record),
        "problem_constants": {
            "lips_const": problem.lips_const,
            "pl_const": problem.pl_const,
            "dim_x": problem.dim_x,
            "dim_y": problem.dim_y,
            "num_clients": problem.num_clients,
        },
        "kernel_backend": backend,
    }


def set_path(tree, dotted, value):
    """Assign into a nested dict by dotted path (creating nothing new)."""
    node = tree
    parts = dotted.split(".")
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"path {dotted!r} does not exist in base config", field="axes")
        node = node[p]
    node[parts[-1]] = value


def apply_overrides(base_raw, overrides):
    out = copy.deepcopy(base_raw)
    for dotted, value in overrides.items():
        for single in dotted.split(","):
            set_path(out, single.strip(), value)
    return out
