"""Client/server simulation substrate: state, aggregation, accounting.

All reductions sum in ascending client-id order, so results are independent
of storage order and of the degree of step parallelism.  Full participation
every round; NaN/Inf iterates abort the run rather than being clamped,
since divergence is a real failure mode of descent-ascent steps and must
stay visible.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import RunAbort

THREADS_ENV = "FEDSADDLE_THREADS"


@dataclass
class ClientState:
    client_id: int
    x: np.ndarray
    y: np.ndarray
    rng: np.random.Generator
    estimator: object = None


@dataclass
class ServerState:
    x_bar: np.ndarray
    y_bar: np.ndarray
    round: int = 0
    comm_counter: int = 0
    sample_counter: int = 0
    u_bar: np.ndarray = None
    v_bar: np.ndarray = None


@dataclass
class AggregateResult:
    x_bar: np.ndarray
    y_bar: np.ndarray
    u_bar: np.ndarray = None
    v_bar: np.ndarray = None


def _ordered(states):
    if not states:
        raise ValueError("cannot aggregate an empty client list")
    out = sorted(states, key=lambda s: s.client_id)
    d1, d2 = out[0].x.shape, out[0].y.shape
    for s in out:
        if s.x.shape != d1 or s.y.shape != d2:
            raise ValueError("heterogeneous client state dimensions")
    return out


def _mean(rows):
    return np.sum(rows, axis=0) / len(rows)


def aggregate(states, mode="plain", *, step_x=0.0, step_y=0.0,
              eta_x=1.0, eta_y=1.0, anchor_x=None, anchor_y=None,
              with_estimators=False):
    """Server-side reduction of client states.

    plain:   arithmetic mean of (x, y).
    stepped: mean of locally stepped endpoints (x - step_x u, y + step_y v),
             with the estimator means returned alongside.
    delta:   anchor + eta * mean(endpoint - anchor) on each variable.
    """
    ordered = _ordered(states)
    if mode == "plain":
        result = AggregateResult(_mean([s.x for s in ordered]), _mean([s.y for s in ordered]))
    elif mode == "stepped":
        result = AggregateResult(
            _mean([s.x - step_x * s.estimator.u for s in ordered]),
            _mean([s.y + step_y * s.estimator.v for s in ordered]),
            u_bar=_mean([s.estimator.u for s in ordered]),
            v_bar=_mean([s.estimator.v for s in ordered]),
        )
    elif mode == "delta":
        # unit global steps collapse to the plain endpoint average; taking
        # that branch literally keeps the collapse exact in floating point
        xs = _mean([s.x for s in ordered]) if eta_x == 1.0 else (
            anchor_x + eta_x * _mean([s.x - anchor_x for s in ordered]))
        ys = _mean([s.y for s in ordered]) if eta_y == 1.0 else (
            anchor_y + eta_y * _mean([s.y - anchor_y for s in ordered]))
        result = AggregateResult(xs, ys)
    else:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    if with_estimators and result.u_bar is None:
        result.u_bar = _mean([s.estimator.u for s in ordered])
        result.v_bar = _mean([s.estimator.v for s in ordered])
    return result


def broadcast(server, states, u_bar=None, v_bar=None):
    """Install server values on every client; drift becomes exactly zero."""
    for s in states:
        s.x[:] = server.x_bar
        s.y[:] = server.y_bar
        if u_bar is not None:
            s.estimator.u[:] = u_bar
        if v_bar is not None:
            s.estimator.v[:] = v_bar
    return states


def drift(states, x_bar, y_bar):
    """(1/N) sum_i (||x_i - x_bar||^2 + ||y_i - y_bar||^2), an independent pass."""
    total = 0.0
    for s in states:
        dx = s.x - x_bar
        dy = s.y - y_bar
        total += float(dx @ dx + dy @ dy)
    return total / len(states)


def thread_count():
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def run_round_parallel(states, step_fn, threads=None):
    """Apply step_fn to every client; result independent of parallelism.

    step_fn must touch only its own client's state and stream.  Any raise
    surfaces as RunAbort carrying the client id.
    """
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(states) == 1:
        for s in states:
            try:
                step_fn(s)
            except Exception as exc:  # noqa: BLE001 - re-raised with context
                raise RunAbort(s.client_id, exc) from exc
        return states
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [(s.client_id, pool.submit(step_fn, s)) for s in states]
        for cid, fut in futures:
            exc = fut.exception()
            if exc is not None:
                raise RunAbort(cid, exc) from exc
    return states
