"""Gradient-estimator state machines.

The variance-reduced estimator keeps a recursive direction per client:

    u <- g_x(x_t, y_t; B) + (1 - alpha) (u - g_x(x_prev, y_prev; B))

with both evaluations on the *same* minibatch B; that correlation is the
whole mechanism.  alpha = beta = 1 collapses to the plain minibatch
estimator (history-free), which the baselines rely on.  Coefficients are
held constant across iterations.

Sample accounting convention: one refresh consumes one logical minibatch
(b samples) per client, even though it evaluates two points with it.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalAbort


@dataclass
class VrEstimatorState:
    u: np.ndarray
    v: np.ndarray
    prev_x: np.ndarray
    prev_y: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0 and 0.0 < self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in (0, 1]")

    def copy(self):
        return VrEstimatorState(
            self.u.copy(), self.v.copy(), self.prev_x.copy(), self.prev_y.copy(),
            self.alpha, self.beta,
        )


@dataclass
class MomentumState:
    """Classical heavy-ball direction buffers for the momentum baseline."""

    u: np.ndarray
    v: np.ndarray
    momentum: float

    def __post_init__(self):
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")


def vr_init(problem, client, x0, y0, init_batch, rng, alpha, beta):
    """Size-B minibatch gradients at the start point seed the estimator."""
    if init_batch < 1:
        raise ValueError("init batch size must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    batch = problem.draw_batch(client, init_batch, rng)
    gx, gy = problem.batch_grads(client, batch, x0, y0)
    return VrEstimatorState(gx.copy(), gy.copy(), x0.copy(), y0.copy(), alpha, beta)


def vr_update(state, problem, client, x, y, batch_size, rng):
    """One recursive refresh; draws the shared minibatch and mutates state."""
    if state.u is None or state.prev_x is None:
        raise RuntimeError("estimator not initialized")
    batch = problem.draw_batch(client, batch_size, rng)
    problem.vr_update_inplace(
        client, x, y, state.prev_x, state.prev_y, state.u, state.v,
        batch, state.alpha, state.beta,
    )
    return state


def estimator_error(state, problem, client, x, y):
    """Distances of (u, v) from the client's exact partial gradients."""
    gx, gy = problem.client_grads(client, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(np.linalg.norm(state.u - gx)), float(np.linalg.norm(state.v - gy))


def check_finite(client_id, iteration, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericalAbort(client_id, iteration)
