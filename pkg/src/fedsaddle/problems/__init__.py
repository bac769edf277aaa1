"""Federated minimax problem families and their data plumbing."""
import numpy as np

from .auroc import AurocLinear, make_auroc_problem
from .base import DataShard, MinimaxProblem, exact_full_grads, sample_partial_grads
from .fair import FairClassification
from .quadratic import QuadraticSaddle, make_quadratic_saddle
from .sharding import (
    make_blobs,
    make_heterogeneous_shards,
    make_imbalanced_binary,
    shards_from_csv,
    shards_to_csv,
)
from .simplex import project_simplex


def inner_maximizer(problem, x):
    """Closed-form argmax_y F(x, y), or None when the family has none."""
    return problem.inner_maximizer(np.asarray(x, dtype=float))


def project_y(problem, y):
    """Problem's dual-feasibility projection (identity when unconstrained)."""
    return problem.project_y(np.asarray(y, dtype=float))


def make_fair_problem(n=600, num_classes=3, feature_dim=5, num_clients=8,
                      heterogeneity=0.3, separation=2.0, seed=0):
    """Worst-class classification toy on label-skewed Gaussian blobs."""
    feats, labels = make_blobs(n, num_classes, feature_dim, separation, seed)
    shards = make_heterogeneous_shards(feats, labels, num_clients, heterogeneity, seed)
    return FairClassification(shards, num_classes, feature_dim)


__all__ = [
    "AurocLinear",
    "DataShard",
    "FairClassification",
    "MinimaxProblem",
    "QuadraticSaddle",
    "exact_full_grads",
    "inner_maximizer",
    "make_auroc_problem",
    "make_blobs",
    "make_fair_problem",
    "make_heterogeneous_shards",
    "make_imbalanced_binary",
    "make_quadratic_saddle",
    "project_simplex",
    "project_y",
    "sample_partial_grads",
    "shards_from_csv",
    "shards_to_csv",
]
