"""Stationarity measures, assumption-constant probes, and task metrics.

Two stationarity notions are supported: the envelope gradient norm
||grad phi(x)|| for problems whose inner maximum is smooth (closed form
where available, an ascent solver otherwise), and the Moreau-envelope
gradient norm for merely-concave duals, evaluated by solving the proximal
subproblem.  All operations here are pure: any internal randomness comes
from a fixed embedded stream.

Probe-based constant estimates are indications for scheduling and sanity
checks, never certificates.
"""
from dataclasses import dataclass

import numpy as np

from .errors import SolverDiagnosticError

_INNER_CAP = 100_000


@dataclass
class StationarityReport:
    grad_phi_norm: float | None = None
    moreau_grad_norm: float | None = None
    primal_dual_gap: float | None = None
    method: str = ""


@dataclass
class AssumptionEstimates:
    sigma2_hat: float
    zeta2_hat: float
    L_hat: float
    mu_hat: float
    gx_hat: float = 0.0


def _fixed_rng(tag):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((0xFED5, tag, 5))))


def auroc(scores, labels):
    """Exact Mann-Whitney statistic P(s+ > s-) + 0.5 P(s+ = s-), O(n log n).

    Ties get half credit via midranks, so an all-equal scorer sits at 0.5.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auroc needs at least one positive and one negative label")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    midranks = upper - (counts - 1) / 2.0
    ranks = midranks[inverse]
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _problem_smoothness(problem):
    if problem.lips_const is not None:
        return problem.lips_const
    return estimate_assumption_constants(problem, probe_count=8, samples_per_probe=4).L_hat


def _problem_pl(problem):
    if problem.pl_const is not None:
        return problem.pl_const
    est = estimate_assumption_constants(problem, probe_count=8, samples_per_probe=4).mu_hat
    if est <= 0:
        raise ValueError("cannot infer a positive concavity modulus for the inner solve")
    return est


def solve_inner_max(problem, x, tolerance=1e-8, y0=None):
    """Gradient ascent on F(x, .) to ||grad_y F|| <= tolerance * mu_hat."""
    lips = _problem_smoothness(problem)
    mu = _problem_pl(problem)
    y = problem.default_init()[1].copy() if y0 is None else np.asarray(y0, dtype=float).copy()
    target = tolerance * mu
    step = 1.0 / lips
    residual = np.inf
    for _ in range(_INNER_CAP):
        gy = problem.full_grads(x, y)[1]
        residual = float(np.linalg.norm(gy))
        if residual <= target:
            return y
        y = y + step * gy
    raise SolverDiagnosticError("inner maximization did not converge", residual)


def grad_phi(problem, x, tolerance=1e-8, method="auto"):
    """Envelope stationarity ||grad phi(x)||; returns (norm, method tag)."""
    x = np.asarray(x, dtype=float)
    if method in ("auto", "closed-form"):
        g = problem.phi_grad(x)
        if g is not None:
            return float(np.linalg.norm(g)), "closed-form"
        if method == "closed-form":
            raise ValueError(f"{problem.name} has no closed-form envelope gradient")
    if problem.y_constraint is not None:
        raise ValueError("inner-solver stationarity needs an unconstrained dual")
    ystar = solve_inner_max(problem, x, tolerance)
    return float(np.linalg.norm(problem.full_grads(x, ystar)[0])), "inner-solver"


def moreau_stationarity(problem, x, lam=None, tolerance=1e-6, max_iters=_INNER_CAP):
    """Moreau-envelope gradient norm ||x - zhat|| / lam at the prox solution.

    Solves min_z phi(z) + ||z - x||^2 / (2 lam) by (sub)gradient descent with
    step lam/2, re-solving the inner max at every step.  With the default
    lam = 1 / (2 L_hat) the subproblem is strongly convex.  For piecewise
    smooth phi the iteration can stall at a kink, so the best-objective
    iterate is kept and a stall also terminates.
    """
    x = np.asarray(x, dtype=float)
    if problem.phi_subgrad(x) is None:
        raise ValueError(f"{problem.name} does not expose an exact inner maximum")
    if lam is None:
        lam = 1.0 / (2.0 * _problem_smoothness(problem))
    # constant-step subgradient descent cannot settle when the active piece
    # of a max-type phi alternates, so the step is halved whenever the best
    # objective stalls; smooth instances never trigger the halving
    step = lam / 2.0
    z = x.copy()
    best_obj = np.inf
    best_z = z.copy()
    stall = 0
    residual = np.inf
    for _ in range(max_iters):
        val, g = problem.phi_subgrad(z)
        diff = z - x
        obj = val + float(diff @ diff) / (2.0 * lam)
        total = g + diff / lam
        residual = float(np.linalg.norm(total))
        if obj < best_obj - 0.1 * tolerance:
            stall = 0
        else:
            stall += 1
        if obj < best_obj:
            best_obj = obj
            best_z = z.copy()
        if residual <= tolerance:
            return float(np.linalg.norm(x - best_z)) / lam
        if stall >= 20:
            step *= 0.5
            stall = 0
            z = best_z.copy()
            if step <= lam * 1e-7:
                return float(np.linalg.norm(x - best_z)) / lam
            continue
        z = z - step * total
    raise SolverDiagnosticError("proximal subproblem did not converge", residual)


def primal_dual_gap(problem, x, y, tolerance=1e-8):
    """phi(x) - F(x, y); nonnegative up to tolerance by definition of phi."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = problem.phi(x)
    if val is None:
        ystar = solve_inner_max(problem, x, tolerance)
        val = problem.full_value(x, ystar)
    gap = val - problem.full_value(x, y)
    if gap < -tolerance:
        raise ValueError(f"negative primal-dual gap {gap:.3e}: inner max inconsistent")
    return float(gap)


def stationarity_report(problem, x, y=None, tolerance=1e-8):
    rep = StationarityReport()
    try:
        rep.grad_phi_norm, rep.method = grad_phi(problem, x, tolerance)
    except ValueError:
        rep.moreau_grad_norm = moreau_stationarity(problem, x, tolerance=max(tolerance, 1e-8))
        rep.method = "proximal-solver"
    if y is not None and problem.phi(np.asarray(x, dtype=float)) is not None:
        rep.primal_dual_gap = primal_dual_gap(problem, x, y, tolerance)
    return rep


def _per_sample_grads(problem, client, count, x, y, rng):
    if hasattr(problem, "per_sample_grads"):
        batch = problem.draw_batch(client, count, rng)
        return problem.per_sample_grads(client, batch, x, y)
    gxs, gys = [], []
    for _ in range(count):
        batch = problem.draw_batch(client, 1, rng)
        gx, gy = problem.batch_grads(client, batch, x, y)
        gxs.append(gx)
        gys.append(gy)
    return np.asarray(gxs), np.asarray(gys)


def estimate_assumption_constants(problem, probe_count=16, rng=None, samples_per_probe=64, probe_scale=1.0):
    """Probe-based (sigma^2, zeta^2, L, mu, G_x) indications.

    sigma2_hat is the worst per-sample gradient variance seen, zeta2_hat the
    worst client dispersion, L_hat the steepest gradient difference quotient,
    mu_hat the smallest PL ratio ||grad_y F||^2 / (2 gap), and gx_hat the
    steepest value change in x at fixed y.
    """
    if probe_count < 2:
        raise ValueError("need at least two probe points")
    if rng is None:
        rng = _fixed_rng(1)
    pts = [
        (probe_scale * rng.standard_normal(problem.dim_x), probe_scale * rng.standard_normal(problem.dim_y))
        for _ in range(probe_count)
    ]
    sigma2 = 0.0
    zeta2 = 0.0
    mu = np.inf
    grads = []
    values = []
    for x, y in pts:
        gx, gy = problem.full_grads(x, y)
        grads.append(np.concatenate([gx, gy]))
        values.append(problem.full_value(x, y))
        disp = 0.0
        for i in range(problem.num_clients):
            cgx, cgy = problem.client_grads(i, x, y)
            disp += float(np.sum((cgx - gx) ** 2) + np.sum((cgy - gy) ** 2))
            sx, sy = _per_sample_grads(problem, i, samples_per_probe, x, y, rng)
            sigma2 = max(sigma2, float(np.mean(np.sum((sx - cgx) ** 2, axis=1) + np.sum((sy - cgy) ** 2, axis=1))))
        zeta2 = max(zeta2, disp / problem.num_clients)
        val = problem.phi(x)
        if val is not None:
            gap = val - values[-1]
            if gap > 1e-12:
                mu = min(mu, float(gy @ gy) / (2.0 * gap))
    lips = 0.0
    gx_lip = 0.0
    for i in range(probe_count):
        for j in range(i + 1, probe_count):
            dx = pts[i][0] - pts[j][0]
            dy = pts[i][1] - pts[j][1]
            dist = np.sqrt(float(dx @ dx + dy @ dy))
            if dist > 1e-12:
                lips = max(lips, float(np.linalg.norm(grads[i] - grads[j])) / dist)
        vi = problem.full_value(pts[i][0], pts[0][1])
        vj = problem.full_value(pts[(i + 1) % probe_count][0], pts[0][1])
        dxx = np.linalg.norm(pts[i][0] - pts[(i + 1) % probe_count][0])
        if dxx > 1e-12:
            gx_lip = max(gx_lip, abs(vi - vj) / float(dxx))
    return AssumptionEstimates(
        sigma2_hat=sigma2,
        zeta2_hat=zeta2,
        L_hat=lips,
        mu_hat=0.0 if not np.isfinite(mu) else mu,
        gx_hat=gx_lip,
    )
