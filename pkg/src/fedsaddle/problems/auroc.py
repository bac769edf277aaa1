"""AUROC maximization as a nonconvex-strongly-concave minimax problem.

The square-loss surrogate for a linear scorer h(m; z) = m'z packs
x = (m, a, b) and keeps a scalar dual w.  Per sample (z, t) with
t in {+1, -1} and positive prior p:

    f = (1-p)(h-a)^2 [t=+1] + p(h-b)^2 [t=-1]
        + 2(1+w)(p h [t=-1] - (1-p) h [t=+1]) - p(1-p) w^2

The objective is exactly quadratic and concave in w with curvature
-2p(1-p) at every point, so the inner maximizer is closed form and the
envelope gradient is exact.
"""
import numpy as np

from ..metrics import auroc
from .base import MinimaxProblem


class AurocLinear(MinimaxProblem):
    name = "auroc"

    def __init__(self, shards, prior_p, eval_features=None, eval_labels=None, init=None):
        if not 0.0 < prior_p < 1.0:
            raise ValueError("prior_p must lie in (0, 1)")
        for shard in shards:
            if not np.all(np.isin(shard.labels, (-1, 1))):
                raise ValueError("labels must be +-1")
        self.shards = list(shards)
        self.num_clients = len(shards)
        self.scorer_dim = shards[0].features.shape[1]
        self.dim_x = self.scorer_dim + 2
        self.dim_y = 1
        self.p = float(prior_p)
        self.pl_const = 2.0 * self.p * (1.0 - self.p)
        self._eval = None
        if eval_features is not None:
            self._eval = (np.asarray(eval_features, dtype=float), np.asarray(eval_labels))
        self._init = init
        self.lips_const = self._exact_smoothness()

    def _exact_smoothness(self):
        """Largest per-sample Hessian norm over all shards (Hessians are
        constant in (x, y), so this is the exact per-sample constant)."""
        worst = 0.0
        k = self.scorer_dim
        for shard in self.shards:
            for z, t in zip(shard.features, shard.labels):
                qp = (1.0 - self.p) if t == 1 else 0.0
                qn = self.p if t == -1 else 0.0
                h = np.zeros((k + 3, k + 3))
                h[:k, :k] = 2.0 * (qp + qn) * np.outer(z, z)
                h[:k, k] = h[k, :k] = -2.0 * qp * z
                h[:k, k + 1] = h[k + 1, :k] = -2.0 * qn * z
                h[:k, k + 2] = h[k + 2, :k] = 2.0 * (qn - qp) * z
                h[k, k] = 2.0 * qp
                h[k + 1, k + 1] = 2.0 * qn
                h[k + 2, k + 2] = -self.pl_const
                worst = max(worst, float(np.max(np.abs(np.linalg.eigvalsh(h)))))
        return worst

    # -- stochastic oracle ------------------------------------------------------
    def draw_batch(self, client, batch_size, rng):
        return rng.integers(0, len(self.shards[client]), size=batch_size)

    def _terms(self, feats, labels, x, y):
        m, a, b = x[:-2], x[-2], x[-1]
        w = y[0]
        h = feats @ m
        pos = labels == 1
        neg = ~pos
        p = self.p
        coef_m = (
            2.0 * (1 - p) * (h - a) * pos
            + 2.0 * p * (h - b) * neg
            + 2.0 * (1.0 + w) * (p * neg - (1 - p) * pos)
        )
        ga = -2.0 * (1 - p) * (h - a) * pos
        gb = -2.0 * p * (h - b) * neg
        gw = 2.0 * (p * h * neg - (1 - p) * h * pos) - self.pl_const * w
        val = (
            (1 - p) * (h - a) ** 2 * pos
            + p * (h - b) ** 2 * neg
            + 2.0 * (1.0 + w) * (p * h * neg - (1 - p) * h * pos)
            - p * (1 - p) * w**2
        )
        return coef_m, ga, gb, gw, val

    def _grads_at(self, feats, labels, x, y):
        coef_m, ga, gb, gw, _ = self._terms(feats, labels, x, y)
        gx = np.empty(self.dim_x)
        gx[:-2] = coef_m @ feats / len(labels)
        gx[-2] = ga.mean()
        gx[-1] = gb.mean()
        return gx, np.array([gw.mean()])

    def batch_grads(self, client, batch, x, y):
        self._check_client(client)
        self._check_point(x, y)
        shard = self.shards[client]
        return self._grads_at(shard.features[batch], shard.labels[batch], x, y)

    def batch_value(self, client, batch, x, y):
        shard = self.shards[client]
        return float(self._terms(shard.features[batch], shard.labels[batch], x, y)[4].mean())

    # -- exact oracle ----------------------------------------------------------------
    def client_grads(self, client, x, y):
        shard = self.shards[client]
        return self._grads_at(shard.features, shard.labels, x, y)

    def client_value(self, client, x, y):
        shard = self.shards[client]
        return float(self._terms(shard.features, shard.labels, x, y)[4].mean())

    # -- structure ----------------------------------------------------------------
    def _dual_drive(self, x):
        """Mean of p h [t=-1] - (1-p) h [t=+1]; w* is this over p(1-p)."""
        m = x[:-2]
        total = 0.0
        for shard in self.shards:
            h = shard.features @ m
            pos = shard.labels == 1
            total += np.mean(self.p * h * ~pos - (1 - self.p) * h * pos)
        return total / self.num_clients

    def inner_maximizer(self, x):
        return np.array([2.0 * self._dual_drive(x) / self.pl_const])

    def task_metric(self, x):
        if self._eval is None:
            return None
        feats, labels = self._eval
        return auroc(feats @ x[:-2], labels)

    def default_init(self):
        if self._init is not None:
            return self._init[0].copy(), self._init[1].copy()
        return np.zeros(self.dim_x), np.zeros(1)


def make_auroc_problem(
    n=800,
    feature_dim=5,
    num_clients=8,
    positive_frac=0.2,
    separation=1.5,
    heterogeneity=0.5,
    eval_n=400,
    init_scale=1.0,
    label_noise=0.0,
    seed=0,
):
    """Imbalanced separable binary toy with a held-out scoring set.

    The default start point is a fixed random scorer direction (scaled by
    init_scale) rather than zero: the very first gradient at zero already
    points along the class separator, which would make any
    rounds-to-threshold comparison vacuous.  label_noise flips that fraction
    of training labels (the scoring set stays clean), raising the oracle
    variance without moving the clean-ranking optimum much.
    """
    from .sharding import make_heterogeneous_shards, make_imbalanced_binary

    feats, labels = make_imbalanced_binary(n + eval_n, feature_dim, positive_frac, separation, seed)
    train_f, train_l = feats[:n], labels[:n].copy()
    if label_noise > 0:
        rng_flip = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 4, 2))))
        flips = rng_flip.random(n) < label_noise
        train_l[flips] = -train_l[flips]
    shards = make_heterogeneous_shards(train_f, train_l, num_clients, heterogeneity, seed)
    prior = float(np.mean(train_l == 1))
    init = None
    if init_scale > 0:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 3, 2))))
        x0 = np.zeros(feature_dim + 2)
        x0[:feature_dim] = rng.standard_normal(feature_dim)
        x0[:feature_dim] *= init_scale / np.linalg.norm(x0[:feature_dim])
        init = (x0, np.zeros(1))
    return AurocLinear(shards, prior, feats[n:], labels[n:], init=init)
