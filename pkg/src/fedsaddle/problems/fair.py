"""Worst-class fair classification as a simplex-constrained minimax problem.

The primal variable is a linear softmax scorer (flattened C x k weight
matrix); the dual variable is a distribution over classes.  The objective

    F(x, y) = (1/N) sum_i sum_c y_c * L_c^i(x)

weights each client's per-class mean cross-entropy, is linear (hence
concave) in y, and its inner maximum over the simplex is the worst global
per-class loss.  A client that holds no samples of some class contributes
zero for that class.

Stochastic gradients draw uniformly with replacement from a client's shard
and reweight each sample by n_i / n_{i,c} so the estimator stays unbiased
for the class-balanced objective.
"""
import numpy as np

from .base import MinimaxProblem
from .simplex import project_simplex


class FairClassification(MinimaxProblem):
    name = "fair"
    y_constraint = "simplex"

    def __init__(self, shards, num_classes, feature_dim):
        for shard in shards:
            if shard.features.shape[1] != feature_dim:
                raise ValueError("shard feature dimension mismatch")
            if shard.labels.min() < 0 or shard.labels.max() >= num_classes:
                raise ValueError("labels outside [0, num_classes)")
        self.shards = list(shards)
        self.num_clients = len(shards)
        self.num_classes = int(num_classes)
        self.feature_dim = int(feature_dim)
        self.dim_x = self.num_classes * self.feature_dim
        self.dim_y = self.num_classes
        # per-sample importance weights n_i / n_{i,c}
        self._weights = []
        self._class_counts = []
        for shard in shards:
            counts = np.bincount(shard.labels, minlength=num_classes)
            self._class_counts.append(counts)
            self._weights.append(len(shard) / counts[shard.labels])

    # -- stochastic oracle ---------------------------------------------------
    def draw_batch(self, client, batch_size, rng):
        return rng.integers(0, len(self.shards[client]), size=batch_size)

    def _ce(self, weight_mat, feats, labels):
        logits = feats @ weight_mat.T
        mx = logits.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(logits - mx).sum(axis=1))
        ce = lse - logits[np.arange(len(labels)), labels]
        soft = np.exp(logits - lse[:, None])
        soft[np.arange(len(labels)), labels] -= 1.0
        return ce, soft

    def batch_grads(self, client, batch, x, y):
        self._check_client(client)
        self._check_point(x, y)
        shard = self.shards[client]
        feats = shard.features[batch]
        labels = shard.labels[batch]
        wgt = self._weights[client][batch]
        ce, soft = self._ce(x.reshape(self.num_classes, -1), feats, labels)
        gx = np.einsum("b,bc,bk->ck", y[labels] * wgt, soft, feats) / len(batch)
        gy = np.bincount(labels, weights=wgt * ce, minlength=self.num_classes) / len(batch)
        return gx.ravel(), gy

    def batch_value(self, client, batch, x, y):
        shard = self.shards[client]
        ce, _ = self._ce(x.reshape(self.num_classes, -1), shard.features[batch], shard.labels[batch])
        wgt = self._weights[client][batch]
        return float(np.mean(y[shard.labels[batch]] * wgt * ce))

    # -- exact oracle ------------------------------------------------------------
    def client_grads(self, client, x, y):
        shard = self.shards[client]
        ce, soft = self._ce(x.reshape(self.num_classes, -1), shard.features, shard.labels)
        counts = self._class_counts[client]
        inv = np.zeros(self.num_classes)
        present = counts > 0
        inv[present] = 1.0 / counts[present]
        coef = y[shard.labels] * inv[shard.labels]
        gx = np.einsum("b,bc,bk->ck", coef, soft, shard.features)
        gy = np.zeros(self.num_classes)
        np.add.at(gy, shard.labels, ce)
        gy[present] /= counts[present]
        return gx.ravel(), gy

    def client_value(self, client, x, y):
        return float(self.class_losses(client, x) @ y)

    def class_losses(self, client, x):
        shard = self.shards[client]
        ce, _ = self._ce(x.reshape(self.num_classes, -1), shard.features, shard.labels)
        counts = self._class_counts[client]
        losses = np.zeros(self.num_classes)
        np.add.at(losses, shard.labels, ce)
        present = counts > 0
        losses[present] /= counts[present]
        return losses

    def global_class_losses(self, x):
        total = np.zeros(self.num_classes)
        for i in range(self.num_clients):
            total += self.class_losses(i, x)
        return total / self.num_clients

    # -- structure ------------------------------------------------------------------
    def phi(self, x):
        return float(self.global_class_losses(x).max())

    def phi_subgrad(self, x):
        losses = self.global_class_losses(x)
        worst = int(np.argmax(losses))  # ties resolve to the lowest class id
        e = np.zeros(self.num_classes)
        e[worst] = 1.0
        grad = np.zeros(self.dim_x)
        for i in range(self.num_clients):
            grad += self.client_grads(i, x, e)[0]
        return float(losses[worst]), grad / self.num_clients

    def project_y(self, y):
        return project_simplex(y)

    def task_metric(self, x):
        return self.phi(x)

    def default_init(self):
        return np.zeros(self.dim_x), np.full(self.num_classes, 1.0 / self.num_classes)
