"""Quadratic saddle family with exact curvature, envelope, and constants.

Each client holds

    f_i(x, y) = 1/2 x' H x + (l + s_i)' x + x' C y - mu/2 ||y||^2

with a shared (possibly indefinite) symmetric H, coupling C, strong-concavity
modulus mu, and mean-zero per-client shift vectors s_i that realize a chosen
client-dispersion level.  Sampled gradients add N(0, sigma^2 I) per-sample
noise (the matching per-sample loss carries the linear term noise' (x; y)),
so the oracle variance is exactly sigma^2 (d1 + d2).

Everything downstream needs is closed form: y*(x) = C'x / mu, the envelope
phi(x) = max_y F(x, y), its gradient, and the joint smoothness constant.
"""
import numpy as np

from .. import kernels
from .base import MinimaxProblem


class QuadraticSaddle(MinimaxProblem):
    name = "quadratic"

    def __init__(self, hess, lin, coup, mu, noise_sigma=0.0, shifts=None, init=None):
        hess = np.ascontiguousarray(hess, dtype=float)
        lin = np.ascontiguousarray(lin, dtype=float)
        coup = np.ascontiguousarray(coup, dtype=float)
        d1, d2 = coup.shape
        if hess.shape != (d1, d1) or lin.shape != (d1,):
            raise ValueError("inconsistent hess/lin/coup dimensions")
        if not np.allclose(hess, hess.T, atol=1e-12):
            raise ValueError("hess must be symmetric")
        if mu <= 0:
            raise ValueError("mu must be positive")
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if shifts is None:
            shifts = np.zeros((1, d1))
        shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
        shifts = shifts - shifts.mean(axis=0)  # mean-zero: F keeps the shared form

        self.dim_x, self.dim_y = d1, d2
        self.num_clients = len(shifts)
        self.mu = float(mu)
        self.noise_sigma = float(noise_sigma)
        self._hess = hess
        self._lin = lin
        self._coup = coup
        self._shifts = shifts
        self._lin_client = np.ascontiguousarray(lin + shifts)

        # exact constants from the joint gradient map [[H, C], [C', -mu I]]
        joint = np.zeros((d1 + d2, d1 + d2))
        joint[:d1, :d1] = hess
        joint[:d1, d1:] = coup
        joint[d1:, :d1] = coup.T
        joint[d1:, d1:] = -mu * np.eye(d2)
        self.lips_const = float(np.max(np.abs(np.linalg.eigvalsh(joint))))
        self.pl_const = self.mu
        self.kappa = self.lips_const / self.mu

        self.phi_hessian = hess + coup @ coup.T / mu
        self._phi_eigs = np.linalg.eigvalsh(self.phi_hessian)
        self._init = init

    # Assumption-style exact diagnostics
    @property
    def sigma2(self):
        """Exact per-sample gradient variance E||g - grad f_i||^2."""
        return self.noise_sigma**2 * (self.dim_x + self.dim_y)

    @property
    def zeta2(self):
        """Exact client dispersion (1/N) sum ||grad f_i - grad F||^2."""
        return float(np.mean(np.sum(self._shifts**2, axis=1)))

    @property
    def stationary_x(self):
        """argmin of phi when the envelope is strongly convex."""
        if self._phi_eigs[0] <= 0:
            return None
        return np.linalg.solve(self.phi_hessian, -self._lin)

    # -- stochastic oracle -------------------------------------------------
    def draw_batch(self, client, batch_size, rng):
        return rng.standard_normal((batch_size, self.dim_x + self.dim_y))

    def batch_grads(self, client, batch, x, y):
        self._check_client(client)
        self._check_point(x, y)
        return kernels.quad_batch_grads(
            self._hess, self._lin_client[client], self._coup, self.mu,
            self.noise_sigma, x, y, batch,
        )

    def batch_value(self, client, batch, x, y):
        nm = batch.mean(axis=0)
        noise_term = self.noise_sigma * (nm[: self.dim_x] @ x + nm[self.dim_x :] @ y)
        return self.client_value(client, x, y) + noise_term

    def per_sample_grads(self, client, batch, x, y):
        """(b, d1) and (b, d2) individual sampled gradients, for diagnostics."""
        gx, gy = self.client_grads(client, x, y)
        return (
            gx + self.noise_sigma * batch[:, : self.dim_x],
            gy + self.noise_sigma * batch[:, self.dim_x :],
        )

    # -- exact oracle --------------------------------------------------------
    def client_grads(self, client, x, y):
        gx = self._hess @ x + self._lin_client[client] + self._coup @ y
        gy = self._coup.T @ x - self.mu * y
        return gx, gy

    def client_value(self, client, x, y):
        return float(
            0.5 * x @ (self._hess @ x)
            + self._lin_client[client] @ x
            + x @ (self._coup @ y)
            - 0.5 * self.mu * (y @ y)
        )

    def full_grads(self, x, y):
        self._check_point(x, y)
        return (
            self._hess @ x + self._lin + self._coup @ y,
            self._coup.T @ x - self.mu * y,
        )

    def full_value(self, x, y):
        return float(
            0.5 * x @ (self._hess @ x)
            + self._lin @ x
            + x @ (self._coup @ y)
            - 0.5 * self.mu * (y @ y)
        )

    # -- structure -------------------------------------------------------------
    def inner_maximizer(self, x):
        return self._coup.T @ x / self.mu

    def phi(self, x):
        cx = self._coup.T @ x
        return float(0.5 * x @ (self._hess @ x) + self._lin @ x + cx @ cx / (2 * self.mu))

    def phi_grad(self, x):
        return self.phi_hessian @ x + self._lin

    def phi_subgrad(self, x):
        return self.phi(x), self.phi_grad(x)

    def default_init(self):
        if self._init is not None:
            return self._init[0].copy(), self._init[1].copy()
        return np.zeros(self.dim_x), np.zeros(self.dim_y)

    # -- hot path ---------------------------------------------------------------
    def vr_update_inplace(self, client, x, y, px, py, u, v, batch, alpha, beta):
        kernels.quad_vr_update(
            self._hess, self._lin_client[client], self._coup, self.mu,
            self.noise_sigma, x, y, px, py, u, v, batch, alpha, beta,
        )

    def vr_fused_round(self, X, Y, PX, PY, U, V, rngs, batch_size, alpha, beta,
                       step_x, step_y, do_step, noise_out):
        """All clients' refreshes (plus the following local step) in one
        kernel call; per-client noise draws consume each stream exactly as
        draw_batch would."""
        for i, gen in enumerate(rngs):
            gen.standard_normal(out=noise_out[i])
        kernels.quad_vr_round(
            self._hess, self._lin_client, self._coup, self.mu, self.noise_sigma,
            X, Y, PX, PY, U, V, noise_out, alpha, beta, step_x, step_y, do_step,
        )


def _orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def make_quadratic_saddle(
    d1=20,
    d2=20,
    num_clients=8,
    kappa=10.0,
    mu=1.0,
    noise_sigma=0.0,
    zeta=0.0,
    seed=0,
    a_lo=-0.5,
    a_hi=0.5,
    x_star_norm=1.0,
    init_grad_norm=1.0,
    dual_offset=0.0,
):
    """Construct an instance with prescribed condition number and dispersion.

    The x-curvature spectrum a_i (in units of mu, spanning [a_lo, a_hi] with
    a_lo < 0 certifying nonconvexity) is paired with coupling singular values

        s_i^2 = mu (kappa - 1)(kappa mu + a_i)

    which pins every paired block's extreme eigenvalue to exactly -kappa*mu,
    hence L_f = kappa*mu and an envelope Hessian spectrum
    kappa*(a_i + (kappa-1)*mu), strongly convex for a_lo > -(kappa-1).
    The default init point is placed so that ||grad phi(x0)|| equals
    init_grad_norm exactly, with the dual started at y*(x0) + offset.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if not a_lo < a_hi:
        raise ValueError("need a_lo < a_hi")
    if a_lo <= -(kappa - 1) and kappa > 1:
        raise ValueError("a_lo too negative: envelope would lose convexity")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 0, 2))))
    p = min(d1, d2)
    a = np.empty(d1)
    a[:p] = np.linspace(a_lo, a_hi, p) * mu
    a[p:] = 0.5 * kappa * mu  # unpaired x-directions stay convex
    s = np.sqrt(mu * (kappa - 1.0) * (kappa * mu + a[:p]))

    u_basis = _orthogonal(rng, d1)
    v_basis = _orthogonal(rng, d2)
    hess = (u_basis * a) @ u_basis.T
    hess = 0.5 * (hess + hess.T)
    coup = u_basis[:, :p] @ (s[:, None] * v_basis[:, :p].T)

    if zeta > 0 and num_clients > 1:
        g = rng.standard_normal((num_clients, d1))
        g -= g.mean(axis=0)
        g *= zeta / np.sqrt(np.mean(np.sum(g**2, axis=1)))
    else:
        g = np.zeros((num_clients, d1))

    phi_h = hess + coup @ coup.T / mu
    x_star = rng.standard_normal(d1)
    x_star *= x_star_norm / np.linalg.norm(x_star)
    lin = -phi_h @ x_star

    w = rng.standard_normal(d1)
    w /= np.linalg.norm(w)
    x0 = x_star + init_grad_norm * np.linalg.solve(phi_h, w)
    y0 = coup.T @ x0 / mu
    if dual_offset:
        dy = rng.standard_normal(d2)
        y0 = y0 + dual_offset * dy / np.linalg.norm(dy)

    return QuadraticSaddle(hess, lin, coup, mu, noise_sigma, g, init=(x0, y0))
