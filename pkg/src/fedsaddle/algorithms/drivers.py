"""Optimizer drivers.

Every driver is a pure function of (problem, hyperparameters, seed): client
streams are spawned per (client, purpose) from the seed, reductions run in
ascending client-id order, and repeated runs are bit-identical.

Two families share one skeleton:

* descent-ascent family (variance-reduced driver, local SGDA, momentum
  local SGDA): every iteration each client steps with its current direction
  estimate, every Q-th iteration the server averages the stepped endpoints
  (and, per flavor, the direction estimates) and broadcasts, then every
  client refreshes its estimate on a fresh shared minibatch.  The refresh
  uses the gradient at the new point and, for the variance-reduced flavor,
  the same minibatch at the previous point.

* snapshot family: Q local steps per round where the ascent gradient is
  evaluated at a frozen snapshot of the primal variable, a server delta
  step with global step sizes, and a snapshot refresh every S rounds.

Constrained duals are projected after every local step and after every
server average.  Measurement rows are taken at aggregation rounds; drift in
a row is the dispersion just before that aggregation.
"""
import numpy as np

from .. import federation, rng as streams
from ..errors import ConfigError, NumericalAbort, RunAbort
from ..estimators import MomentumState, VrEstimatorState
from ..federation import ClientState, ServerState
from ..metrics import moreau_stationarity
from .records import RecordingOptions, RunRecord, Trajectory

__all__ = [
    "fedsgda_m",
    "fedsgda_plus",
    "local_sgda",
    "local_sgda_plus",
    "momentum_local_sgda",
    "centralized_sgda",
]


def _build_record(problem, opts, it, samples, comm, x_bar, y_bar, drift_val):
    objective = problem.full_value(x_bar, y_bar)
    rec = RunRecord(
        iter=it, samples_total=samples, comm_rounds=comm,
        objective=objective, drift=drift_val,
    )
    if opts.grad_phi:
        g = problem.phi_grad(x_bar)
        if g is not None:
            rec.stat_ncsc = float(np.linalg.norm(g))
    if opts.gap:
        val = problem.phi(x_bar)
        if val is not None:
            rec.gap = val - objective
    if opts.moreau:
        rec.stat_ncc = moreau_stationarity(
            problem, x_bar, lam=opts.moreau_lam, tolerance=opts.moreau_tol
        )
    if opts.task_metric:
        rec.task_metric = problem.task_metric(x_bar)
    return rec


def _abort_nonfinite(states, it, force=False):
    for s in states:
        if not (np.all(np.isfinite(s.x)) and np.all(np.isfinite(s.y))):
            raise NumericalAbort(s.client_id, it)
    if force:
        # a reduction overflowed before any single iterate left float range
        raise NumericalAbort(states[0].client_id, it, detail="aggregate overflow")


def _echo(problem, hp, seed, algo):
    return {
        "algorithm": algo,
        "seed": int(seed),
        "problem": problem.name,
        "num_clients": problem.num_clients,
        "hyperparams": hp.as_dict(),
    }


def _run_local_family(problem, hp, seed, opts, *, algo, storm, avg_estimators):
    hp.validate()
    opts = opts or RecordingOptions()
    n = problem.num_clients
    constrained = problem.y_constraint is not None
    x0, y0 = problem.default_init()
    if constrained:
        y0 = problem.project_y(y0)

    # client iterates and direction estimates live in stacked row-major
    # blocks; each ClientState holds row views, so the federation helpers
    # and the fused per-round kernels see the same memory
    X = np.tile(x0, (n, 1))
    Y = np.tile(y0, (n, 1))
    U = np.empty((n, problem.dim_x))
    V = np.empty((n, problem.dim_y))
    PX = np.tile(x0, (n, 1))
    PY = np.tile(y0, (n, 1))
    states = []
    for i in range(n):
        init_rng = streams.stream(seed, i, streams.INIT_BATCH)
        batch = problem.draw_batch(i, hp.init_batch, init_rng)
        gx, gy = problem.batch_grads(i, batch, x0, y0)
        U[i] = gx
        V[i] = gy
        if storm:
            est = VrEstimatorState(U[i], V[i], PX[i], PY[i], hp.alpha, hp.beta)
        else:
            est = MomentumState(U[i], V[i], hp.momentum)
        states.append(ClientState(i, X[i], Y[i], streams.stream(seed, i, streams.BATCHES), est))
    batch_rngs = [s.rng for s in states]
    fused = getattr(problem, "vr_fused_round", None) if storm else None
    server = ServerState(x0.copy(), y0.copy())
    samples = n * hp.init_batch

    sx, sy, b, mom = hp.step_x, hp.step_y, hp.b, hp.momentum
    n_agg = hp.T // hp.Q
    out_rng = streams.server_stream(seed, streams.OUTPUT_CHOICE)
    sampled_k = int(out_rng.integers(1, n_agg + 1)) if n_agg >= 1 else 0
    records = [_build_record(problem, opts, 0, samples, 0, server.x_bar, server.y_bar, 0.0)]
    sampled = (server.x_bar.copy(), server.y_bar.copy(), 0)
    y_max = float(server.y_bar @ server.y_bar)
    iterates = [(0, server.x_bar.copy(), server.y_bar.copy())] if opts.store_iterates else None

    agg_idx = 0
    Q, T, every, alpha, beta = hp.Q, hp.T, opts.every, hp.alpha, hp.beta

    def aggregate_round(t):
        """Stacked-array equivalent of plain aggregate + broadcast (rows are
        already in ascending client-id order, matching the reduction contract)."""
        nonlocal agg_idx
        agg_idx += 1
        x_bar = np.sum(X, axis=0) / n
        y_bar = np.sum(Y, axis=0) / n
        dx = X - x_bar
        dy = Y - y_bar
        drift_val = (np.einsum("ij,ij->", dx, dx) + np.einsum("ij,ij->", dy, dy)) / n
        if not np.isfinite(drift_val):
            _abort_nonfinite(states, t, force=True)
        if constrained:
            y_bar = problem.project_y(y_bar)
        server.x_bar[:] = x_bar
        server.y_bar[:] = y_bar
        server.comm_counter += 1
        X[:] = server.x_bar
        Y[:] = server.y_bar
        if avg_estimators:
            U[:] = np.sum(U, axis=0) / n
            V[:] = np.sum(V, axis=0) / n
        return drift_val

    def note_round(t, drift_val):
        nonlocal y_max, sampled
        y_max = max(y_max, float(server.y_bar @ server.y_bar))
        if agg_idx == sampled_k:
            sampled = (server.x_bar.copy(), server.y_bar.copy(), t)
        if agg_idx % every == 0 or agg_idx == n_agg:
            records.append(
                _build_record(problem, opts, t, samples, server.comm_counter,
                              server.x_bar, server.y_bar, drift_val)
            )
            if iterates is not None:
                iterates.append((t, server.x_bar.copy(), server.y_bar.copy()))

    if fused is not None and not constrained:
        # hot path: the kernel applies each upcoming local step right after
        # the refresh, so only aggregation rounds surface in Python
        noise_buf = np.empty((n, b, problem.dim_x + problem.dim_y))
        X -= sx * U
        Y += sy * V
        for t in range(1, T + 1):
            if t % Q == 0:
                note_round(t, aggregate_round(t))
            fused(X, Y, PX, PY, U, V, batch_rngs, b, alpha, beta,
                  sx, sy, t < T, noise_buf)
            samples += n * b
    else:
        if storm:
            def refresh(s):
                est = s.estimator
                batch = problem.draw_batch(s.client_id, b, s.rng)
                problem.vr_update_inplace(
                    s.client_id, s.x, s.y, est.prev_x, est.prev_y,
                    est.u, est.v, batch, est.alpha, est.beta,
                )
        else:
            def refresh(s):
                est = s.estimator
                batch = problem.draw_batch(s.client_id, b, s.rng)
                gx, gy = problem.batch_grads(s.client_id, batch, s.x, s.y)
                est.u *= mom
                est.u += gx
                est.v *= mom
                est.v += gy

        for t in range(1, T + 1):
            X -= sx * U
            Y += sy * V
            if constrained:
                for s in states:
                    s.y[:] = problem.project_y(s.y)
            if t % Q == 0:
                note_round(t, aggregate_round(t))
            federation.run_round_parallel(states, refresh)
            samples += n * b

    server.sample_counter = samples
    if hp.T % hp.Q == 0 and n_agg >= 1:
        final_x, final_y = server.x_bar.copy(), server.y_bar.copy()
    else:
        virt = federation.aggregate(states, "plain")
        final_x, final_y = virt.x_bar, virt.y_bar
    return Trajectory(
        algo=algo, seed=int(seed), records=records,
        final_x=final_x, final_y=final_y,
        sampled_x=sampled[0], sampled_y=sampled[1], sampled_iter=sampled[2],
        y_norm_sq_max=y_max,
        config=_echo(problem, hp, seed, algo) | {"samples_consumed": samples},
        iterates=iterates,
    )


def fedsgda_m(problem, hp, seed, opts=None):
    """Variance-reduced federated descent ascent (momentum estimators,
    estimator averaging at aggregation)."""
    return _run_local_family(problem, hp, seed, opts, algo="fedsgda_m",
                             storm=True, avg_estimators=True)


def local_sgda(problem, hp, seed, opts=None):
    """Plain local SGDA: history-free minibatch directions, plain averaging."""
    hp = hp.replace(alpha=1.0, beta=1.0)
    return _run_local_family(problem, hp, seed, opts, algo="local_sgda",
                             storm=True, avg_estimators=False)


def momentum_local_sgda(problem, hp, seed, opts=None):
    """Heavy-ball local SGDA; direction buffers reset to their average at
    aggregation."""
    return _run_local_family(problem, hp, seed, opts, algo="momentum_local_sgda",
                             storm=False, avg_estimators=True)


def fedsgda_plus(problem, hp, seed, opts=None, _algo="fedsgda_plus"):
    """Snapshot-family driver with global server step sizes."""
    hp.validate()
    opts = opts or RecordingOptions()
    n = problem.num_clients
    constrained = problem.y_constraint is not None
    x0, y0 = problem.default_init()
    if constrained:
        y0 = problem.project_y(y0)

    states = [
        ClientState(i, x0.copy(), y0.copy(), streams.stream(seed, i, streams.BATCHES))
        for i in range(n)
    ]
    server = ServerState(x0.copy(), y0.copy())
    x_tilde = x0.copy()
    samples = 0

    out_rng = streams.server_stream(seed, streams.OUTPUT_CHOICE)
    sampled_k = int(out_rng.integers(1, hp.T + 1))
    records = [_build_record(problem, opts, 0, 0, 0, server.x_bar, server.y_bar, 0.0)]
    sampled = (server.x_bar.copy(), server.y_bar.copy(), 0)
    y_max = float(server.y_bar @ server.y_bar)
    iterates = [(0, server.x_bar.copy(), server.y_bar.copy())] if opts.store_iterates else None
    c_hat, c, b = hp.c_hat, hp.c, hp.b

    def local_steps(s):
        # descent uses the client's current pair, ascent evaluates at the
        # frozen snapshot; one shared minibatch feeds both partials
        for _ in range(hp.Q):
            batch = problem.draw_batch(s.client_id, b, s.rng)
            gx = problem.batch_grads(s.client_id, batch, s.x, s.y)[0]
            gy = problem.batch_grads(s.client_id, batch, x_tilde, s.y)[1]
            s.x -= c_hat * gx
            s.y += c * gy
            if not (np.all(np.isfinite(s.x)) and np.all(np.isfinite(s.y))):
                raise NumericalAbort(s.client_id, hp.Q)
            if constrained:
                s.y[:] = problem.project_y(s.y)

    for t in range(hp.T):
        try:
            federation.run_round_parallel(states, local_steps)
        except RunAbort as exc:
            if isinstance(exc.cause, NumericalAbort):
                raise NumericalAbort(exc.client_id, t + 1) from exc
            raise
        samples += n * b * hp.Q
        _abort_nonfinite(states, t + 1)

        agg = federation.aggregate(
            states, "delta", eta_x=hp.eta_x, eta_y=hp.eta_y,
            anchor_x=server.x_bar, anchor_y=server.y_bar,
        )
        endpoint = federation.aggregate(states, "plain")
        drift_val = federation.drift(states, endpoint.x_bar, endpoint.y_bar)
        server.x_bar[:] = agg.x_bar
        server.y_bar[:] = problem.project_y(agg.y_bar) if constrained else agg.y_bar
        server.comm_counter += 1
        federation.broadcast(server, states)
        y_max = max(y_max, float(server.y_bar @ server.y_bar))
        rnd = t + 1
        if rnd == sampled_k:
            sampled = (server.x_bar.copy(), server.y_bar.copy(), rnd)
        if rnd % opts.every == 0 or rnd == hp.T:
            records.append(
                _build_record(problem, opts, rnd, samples, server.comm_counter,
                              server.x_bar, server.y_bar, drift_val)
            )
            if iterates is not None:
                iterates.append((rnd, server.x_bar.copy(), server.y_bar.copy()))
        if rnd % hp.S == 0:
            x_tilde = server.x_bar.copy()

    server.sample_counter = samples
    return Trajectory(
        algo=_algo, seed=int(seed), records=records,
        final_x=server.x_bar.copy(), final_y=server.y_bar.copy(),
        sampled_x=sampled[0], sampled_y=sampled[1], sampled_iter=sampled[2],
        y_norm_sq_max=y_max,
        config=_echo(problem, hp, seed, _algo) | {"samples_consumed": samples},
        iterates=iterates,
    )


def local_sgda_plus(problem, hp, seed, opts=None):
    """Snapshot baseline: plain averaging of client endpoints (unit global steps)."""
    return fedsgda_plus(problem, hp.replace(eta_x=1.0, eta_y=1.0), seed, opts,
                        _algo="local_sgda_plus")


def centralized_sgda(problem, hp, seed, opts=None):
    """Single-machine SGDA reference; requires a single-client problem."""
    hp.validate()
    opts = opts or RecordingOptions()
    if problem.num_clients != 1:
        raise ConfigError("centralized driver needs a single-client problem", field="problem")
    constrained = problem.y_constraint is not None
    x, y = problem.default_init()
    if constrained:
        y = problem.project_y(y)

    init_rng = streams.stream(seed, 0, streams.INIT_BATCH)
    batch_rng = streams.stream(seed, 0, streams.BATCHES)
    u, v = problem.batch_grads(0, problem.draw_batch(0, hp.init_batch, init_rng), x, y)
    samples = hp.init_batch

    out_rng = streams.server_stream(seed, streams.OUTPUT_CHOICE)
    sampled_k = int(out_rng.integers(1, hp.T + 1))
    records = [_build_record(problem, opts, 0, samples, 0, x, y, 0.0)]
    sampled = (x.copy(), y.copy(), 0)
    y_max = float(y @ y)
    iterates = [(0, x.copy(), y.copy())] if opts.store_iterates else None
    sx, sy, b = hp.step_x, hp.step_y, hp.b

    for t in range(1, hp.T + 1):
        x -= sx * u
        y += sy * v
        if constrained:
            y = problem.project_y(y)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NumericalAbort(0, t)
        y_max = max(y_max, float(y @ y))
        if t == sampled_k:
            sampled = (x.copy(), y.copy(), t)
        if t % opts.every == 0 or t == hp.T:
            records.append(_build_record(problem, opts, t, samples, t, x, y, 0.0))
            if iterates is not None:
                iterates.append((t, x.copy(), y.copy()))
        batch = problem.draw_batch(0, b, batch_rng)
        u, v = problem.batch_grads(0, batch, x, y)
        samples += b

    return Trajectory(
        algo="centralized_sgda", seed=int(seed), records=records,
        final_x=x.copy(), final_y=y.copy(),
        sampled_x=sampled[0], sampled_y=sampled[1], sampled_iter=sampled[2],
        y_norm_sq_max=y_max,
        config=_echo(problem, hp, seed, "centralized_sgda") | {"samples_consumed": samples},
        iterates=iterates,
    )
