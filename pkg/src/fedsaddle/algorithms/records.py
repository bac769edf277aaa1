"""Per-round measurement rows and whole-run trajectories."""
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunRecord:
    """One measurement row, taken at a server aggregation.

    drift is the client dispersion measured just before that aggregation
    (immediately after one, it is exactly zero by construction).
    """

    iter: int
    samples_total: int
    comm_rounds: int
    objective: float
    drift: float
    stat_ncsc: float | None = None  # ||grad phi|| when exactly computable
    stat_ncc: float | None = None  # Moreau-envelope surrogate
    gap: float | None = None  # phi(x) - F(x, y)
    task_metric: float | None = None


@dataclass
class RecordingOptions:
    every: int = 1  # keep every k-th aggregation round (first and last always)
    grad_phi: bool = True
    gap: bool = False
    moreau: bool = False
    moreau_lam: float | None = None
    moreau_tol: float = 1e-4
    task_metric: bool = True
    store_iterates: bool = False


@dataclass
class Trajectory:
    algo: str
    seed: int
    records: list
    final_x: np.ndarray
    final_y: np.ndarray
    sampled_x: np.ndarray  # uniform-random aggregation-round iterate
    sampled_y: np.ndarray
    sampled_iter: int
    y_norm_sq_max: float  # running max of ||y_bar||^2, a dual-boundedness probe
    config: dict = field(default_factory=dict)
    iterates: list | None = None

    def __post_init__(self):
        if not self.records:
            raise ValueError("trajectory must hold at least one record")
        iters = [r.iter for r in self.records]
        if any(b <= a for a, b in zip(iters, iters[1:])):
            raise ValueError("record iterations must be strictly increasing")

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def min_stat(self):
        vals = [r.stat_ncsc for r in self.records if r.stat_ncsc is not None]
        return min(vals) if vals else None
