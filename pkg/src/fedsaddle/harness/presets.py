"""Shipped experiment presets (desk-scale shapes of the headline studies)."""
import copy

_QUAD_PROBLEM = {
    "family": "quadratic",
    "d1": 20, "d2": 20, "num_clients": 8,
    "kappa": 10.0, "mu": 1.0,
    "noise_sigma": 0.005, "zeta": 1.0,
    "init_grad_norm": 3e-3,
    "seed": 1,
}

_EXPERIMENTS = {
    # strongly-concave convergence under the guarantee-driven schedule
    "quadratic-ncsc": {
        "problem": dict(_QUAD_PROBLEM),
        "algorithm": "fedsgda_m",
        "hyperparams": {"schedule": "ncpl", "kappa": "auto", "L": "auto",
                        "N": "auto", "b": 10, "nu": 1.0, "T0": 200},
        "seeds": list(range(10)),
        "record": {"every": 100},
    },
    # worst-class classification: snapshot drivers with global steps
    "fair-ncc": {
        "problem": {"family": "fair", "n": 600, "num_classes": 3, "feature_dim": 5,
                    "num_clients": 8, "heterogeneity": 0.3, "separation": 2.0, "seed": 1},
        "algorithms": ["fedsgda_plus", "local_sgda_plus"],
        "hyperparams": {"T": 500, "Q": 5, "S": 5, "b": 8,
                        "c_hat": 0.02, "c": 0.02, "eta_x": 1.5, "eta_y": 1.5},
        "seeds": list(range(10)),
        "record": {"every": 50, "moreau": True, "moreau_tol": 1e-2, "grad_phi": False},
    },
    # scorer quality vs rounds on the imbalanced binary toy with one-class
    # clients; per-algorithm fields carry each method's tuned values
    # (matched effective steps; the variance-reduced driver keeps its own
    # large init batch, which is part of its definition)
    "auroc-ncsc": {
        "problem": {"family": "auroc", "n": 800, "feature_dim": 5, "num_clients": 8,
                    "positive_frac": 0.2, "separation": 3.0, "heterogeneity": 0.02,
                    "eval_n": 2000, "init_scale": 2.0, "seed": 1},
        "algorithms": ["fedsgda_m", "momentum_local_sgda", "local_sgda"],
        "hyperparams": {"T": 6000, "Q": 20, "b": 2, "B": 2, "eta": 1.0,
                        "c_hat": 0.01, "c": 0.01, "alpha": 0.05, "beta": 0.05,
                        "momentum": 0.9},
        "per_algorithm": {
            "fedsgda_m": {"B": 64},
            "momentum_local_sgda": {"c_hat": 0.001, "c": 0.001},
        },
        "seeds": list(range(10)),
        "record": {"every": 1, "grad_phi": False},
    },
}

_SWEEPS = {
    # worker-count scaling at a fixed schedule input
    "quadratic-ncsc-speedup": {
        "base": {
            "problem": dict(_QUAD_PROBLEM),
            "algorithm": "fedsgda_m",
            "hyperparams": {"schedule": "ncpl", "kappa": "auto", "L": "auto",
                            "N": "auto", "b": 1, "nu": 1.0, "T0": 1728},
            "seeds": list(range(10)),
            "record": {"every": 200},
        },
        "axes": {"problem.num_clients": [1, 2, 4, 8]},
    },
    # client-drift ablation: local-update count x momentum coefficient
    "ablation-q-momentum": {
        "base": {
            "problem": dict(_QUAD_PROBLEM, noise_sigma=0.05),
            "algorithm": "fedsgda_m",
            "hyperparams": {"T": 2000, "Q": 10, "b": 1, "eta": 0.005,
                            "c_hat": 0.00185, "c": 0.1667, "alpha": 0.1, "beta": 0.1},
            "seeds": list(range(10)),
            "record": {"every": 1},
        },
        "axes": {"hyperparams.Q": [10, 20, 50],
                 "hyperparams.alpha,hyperparams.beta": [0.1, 0.5, 0.9]},
    },
}


def experiment_preset(name):
    if name not in _EXPERIMENTS:
        raise KeyError(f"unknown experiment preset {name!r}; have {sorted(_EXPERIMENTS)}")
    return copy.deepcopy(_EXPERIMENTS[name])


def sweep_preset(name):
    if name not in _SWEEPS:
        raise KeyError(f"unknown sweep preset {name!r}; have {sorted(_SWEEPS)}")
    return copy.deepcopy(_SWEEPS[name])


def preset_names():
    return {"experiments": sorted(_EXPERIMENTS), "sweeps": sorted(_SWEEPS)}
