"""Label-skew partitioning of a dataset into client shards, plus toy datasets.

Heterogeneity is the Dirichlet concentration: large values approach an IID
split, values near zero approach one-class-per-client.  Partitions are a
deterministic function of the seed.
"""
import csv

import numpy as np

from .base import DataShard

# above this, per-class proportions are numerically indistinguishable from uniform
_ALPHA_CAP = 1e8


def make_heterogeneous_shards(features, labels, num_clients, heterogeneity, seed):
    """Split (features, labels) into num_clients nonempty label-skewed shards."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    n = len(labels)
    if heterogeneity < 0:
        raise ValueError("heterogeneity must be >= 0")
    if num_clients < 1:
        raise ValueError("num_clients must be >= 1")
    if n < num_clients:
        raise ValueError("need at least one sample per client")
    if num_clients == 1:
        return [DataShard(0, features.copy(), labels.copy())]

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 0, 4))))
    assigned = [[] for _ in range(num_clients)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        if heterogeneity == 0.0:
            assigned[rng.integers(num_clients)].extend(idx)
            continue
        alpha = min(heterogeneity, _ALPHA_CAP)
        prop = rng.dirichlet(np.full(num_clients, alpha))
        counts = _apportion(prop, len(idx))
        for client, chunk in enumerate(np.split(idx, np.cumsum(counts)[:-1])):
            assigned[client].extend(chunk)

    _fill_empty(assigned)
    shards = []
    for client, idx in enumerate(assigned):
        order = np.sort(np.asarray(idx, dtype=int))
        shards.append(DataShard(client, features[order].copy(), labels[order].copy()))
    return shards


def _apportion(prop, n):
    """Integer counts summing to n, proportional to prop (largest remainder)."""
    raw = prop * n
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    if short > 0:
        counts[np.argsort(raw - counts)[::-1][:short]] += 1
    return counts


def _fill_empty(assigned):
    for client, idx in enumerate(assigned):
        while not idx:
            donor = max(range(len(assigned)), key=lambda j: len(assigned[j]))
            if len(assigned[donor]) <= 1:
                raise ValueError("cannot make every shard nonempty")
            idx.append(assigned[donor].pop())


def make_blobs(n, num_classes, feature_dim, separation=1.0, seed=0):
    """Gaussian class-conditional blobs with integer labels 0..C-1."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 1, 4))))
    centers = rng.standard_normal((num_classes, feature_dim))
    centers *= separation / np.linalg.norm(centers, axis=1, keepdims=True)
    labels = rng.integers(num_classes, size=n)
    features = centers[labels] + rng.standard_normal((n, feature_dim))
    return features, labels.astype(np.int64)


def make_imbalanced_binary(n, feature_dim, positive_frac=0.2, separation=1.5, seed=0):
    """Linearly separable-ish +-1 task with a minority positive class."""
    if not 0 < positive_frac < 1:
        raise ValueError("positive_frac must lie in (0, 1)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 2, 4))))
    direction = rng.standard_normal(feature_dim)
    direction /= np.linalg.norm(direction)
    labels = np.where(rng.random(n) < positive_frac, 1, -1).astype(np.int64)
    features = rng.standard_normal((n, feature_dim)) + np.outer(labels * separation / 2, direction)
    return features, labels


def shards_to_csv(shards, path):
    """Write shards as rows `client_id,label,f0..f{k-1}` for reproducibility."""
    k = shards[0].features.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["client_id", "label"] + [f"f{j}" for j in range(k)])
        for shard in shards:
            for label, row in zip(shard.labels, shard.features):
                writer.writerow([shard.client_id, int(label)] + [repr(float(v)) for v in row])


def shards_from_csv(path):
    by_client = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["client_id", "label"]:
            raise ValueError(f"unexpected shard CSV header: {header[:2]}")
        for row in reader:
            cid = int(row[0])
            by_client.setdefault(cid, ([], []))
            by_client[cid][0].append([float(v) for v in row[2:]])
            by_client[cid][1].append(int(row[1]))
    return [
        DataShard(cid, np.asarray(feats), np.asarray(labs, dtype=np.int64))
        for cid, (feats, labs) in sorted(by_client.items())
    ]
