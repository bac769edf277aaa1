"""Core abstractions for federated minimax objectives.

A problem is an average of per-client losses F(x, y) = (1/N) sum_i f_i(x, y),
nonconvex in the d1-dimensional x and concave (or strongly concave) in the
d2-dimensional y.  Clients expose a stochastic first-order oracle: draw a
minibatch, then evaluate partial gradients at one or more points with that
same minibatch (the reuse is what variance-reduced estimators exploit).

Problem objects are immutable after construction and safe to share across
threads; RNG streams are owned by callers and never stored here.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DataShard:
    """One client's local dataset."""

    client_id: int
    features: np.ndarray  # (n_i, feature_dim) float64
    labels: np.ndarray  # (n_i,) int64

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("shard features must be (n, k), labels (n,)")
        if len(self.features) != len(self.labels):
            raise ValueError("shard features/labels length mismatch")
        if len(self.labels) < 1:
            raise ValueError(f"shard for client {self.client_id} is empty")

    def __len__(self):
        return len(self.labels)


class MinimaxProblem:
    """Base interface; concrete families override the oracle methods.

    Subclasses set dim_x, dim_y, num_clients, y_constraint (None or
    "simplex"), and optionally shards (data-backed families), plus the exact
    smoothness/concavity constants when they are known in closed form.
    """

    name = "minimax"
    y_constraint = None
    shards = None
    lips_const = None  # joint gradient Lipschitz constant, when exact
    pl_const = None  # strong-concavity / PL modulus in y, when exact

    # -- stochastic oracle ------------------------------------------------
    def draw_batch(self, client, batch_size, rng):
        raise NotImplementedError

    def batch_grads(self, client, batch, x, y):
        """Minibatch-averaged per-sample partial gradients at (x, y)."""
        raise NotImplementedError

    def batch_value(self, client, batch, x, y):
        """Minibatch-averaged per-sample loss; the potential of batch_grads."""
        raise NotImplementedError

    # -- exact oracle ------------------------------------------------------
    def client_grads(self, client, x, y):
        raise NotImplementedError

    def client_value(self, client, x, y):
        raise NotImplementedError

    def full_grads(self, x, y):
        """Exact partial gradients of F, averaged over clients in id order."""
        self._check_point(x, y)
        gx = np.zeros(self.dim_x)
        gy = np.zeros(self.dim_y)
        for i in range(self.num_clients):
            cgx, cgy = self.client_grads(i, x, y)
            gx += cgx
            gy += cgy
        return gx / self.num_clients, gy / self.num_clients

    def full_value(self, x, y):
        return sum(self.client_value(i, x, y) for i in range(self.num_clients)) / self.num_clients

    # -- structure ---------------------------------------------------------
    def inner_maximizer(self, x):
        """Exact argmax_y F(x, y) when available in closed form, else None."""
        return None

    def phi(self, x):
        """max_y F(x, y) when computable, else None."""
        ystar = self.inner_maximizer(x)
        if ystar is None:
            return None
        return self.full_value(x, ystar)

    def phi_grad(self, x):
        """Exact gradient of the primal envelope, else None."""
        ystar = self.inner_maximizer(x)
        if ystar is None:
            return None
        return self.full_grads(x, ystar)[0]

    def phi_subgrad(self, x):
        """(phi(x), subgradient) for prox solves; defaults to the smooth case."""
        g = self.phi_grad(x)
        if g is None:
            return None
        return self.phi(x), g

    def project_y(self, y):
        return y

    def task_metric(self, x):
        return None

    def default_init(self):
        return np.zeros(self.dim_x), np.zeros(self.dim_y)

    # -- variance-reduction hot path ----------------------------------------
    def vr_update_inplace(self, client, x, y, px, py, u, v, batch, alpha, beta):
        """STORM-style refresh of (u, v) in place; subclasses may fuse this."""
        gxn, gyn = self.batch_grads(client, batch, x, y)
        gxo, gyo = self.batch_grads(client, batch, px, py)
        u[:] = gxn + (1.0 - alpha) * (u - gxo)
        v[:] = gyn + (1.0 - beta) * (v - gyo)
        px[:] = x
        py[:] = y

    # -- helpers -------------------------------------------------------------
    def _check_point(self, x, y):
        if x.shape != (self.dim_x,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.dim_x},)")
        if y.shape != (self.dim_y,):
            raise ValueError(f"y has shape {y.shape}, expected ({self.dim_y},)")

    def _check_client(self, client):
        if not 0 <= client < self.num_clients:
            raise ValueError(f"client {client} out of range [0, {self.num_clients})")


def sample_partial_grads(problem, client, x, y, batch_size, rng):
    """Draw one minibatch and return its averaged partial gradients.

    Sampling is uniform with replacement from the client's shard, so the
    expectation over the stream equals the client's exact partial gradients.
    """
    problem._check_client(client)
    problem._check_point(np.asarray(x), np.asarray(y))
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    batch = problem.draw_batch(client, batch_size, rng)
    return problem.batch_grads(client, batch, x, y)


def exact_full_grads(problem, x, y):
    return problem.full_grads(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
