"""fedsaddle: deterministic simulator for federated nonconvex minimax optimization."""
from . import algorithms, estimators, federation, kernels, metrics, problems
from .algorithms import (
    ALGORITHMS,
    HyperParams,
    RecordingOptions,
    RunRecord,
    Trajectory,
    centralized_sgda,
    fedsgda_m,
    fedsgda_plus,
    local_sgda,
    local_sgda_plus,
    momentum_local_sgda,
    theorem_schedule_ncc,
    theorem_schedule_ncpl,
)
from .errors import ConfigError, NumericalAbort, RunAbort, SolverDiagnosticError
from .metrics import (
    AssumptionEstimates,
    StationarityReport,
    auroc,
    estimate_assumption_constants,
    grad_phi,
    moreau_stationarity,
    primal_dual_gap,
)
from .problems import (
    AurocLinear,
    DataShard,
    FairClassification,
    MinimaxProblem,
    QuadraticSaddle,
    make_auroc_problem,
    make_fair_problem,
    make_heterogeneous_shards,
    make_quadratic_saddle,
    project_simplex,
)

__version__ = "0.1.0"
