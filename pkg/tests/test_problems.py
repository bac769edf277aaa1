import numpy as np
import pytest

from fedsaddle import make_fair_problem, make_auroc_problem, make_quadratic_saddle
from fedsaddle.problems import (
    DataShard,
    exact_full_grads,
    make_blobs,
    make_heterogeneous_shards,
    make_imbalanced_binary,
    project_simplex,
    sample_partial_grads,
    shards_from_csv,
    shards_to_csv,
)
from conftest import rng_for


def all_problems(seed=2):
    return [
        make_quadratic_saddle(d1=6, d2=5, num_clients=3, kappa=6, mu=0.8,
                              noise_sigma=0.15, zeta=0.6, seed=seed),
        make_fair_problem(n=120, num_classes=3, feature_dim=4, num_clients=3,
                          heterogeneity=0.5, seed=seed),
        make_auroc_problem(n=160, feature_dim=4, num_clients=3, positive_frac=0.3,
                           heterogeneity=0.5, eval_n=60, seed=seed),
    ]


def fd_batch_grads(problem, client, batch, x, y, h=1e-5):
    """Central differences of the minibatch loss; the independent oracle."""
    gx = np.zeros_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        gx[j] = (problem.batch_value(client, batch, x + e, y)
                 - problem.batch_value(client, batch, x - e, y)) / (2 * h)
    gy = np.zeros_like(y)
    for j in range(len(y)):
        e = np.zeros_like(y)
        e[j] = h
        gy[j] = (problem.batch_value(client, batch, x, y + e)
                 - problem.batch_value(client, batch, x, y - e)) / (2 * h)
    return gx, gy


class TestGradientOracles:
    @pytest.mark.parametrize("pidx", [0, 1, 2])
    def test_finite_difference_match(self, pidx):
        problem = all_problems()[pidx]
        rng = rng_for(10 + pidx)
        for trial in range(25):
            client = int(rng.integers(problem.num_clients))
            x = 0.7 * rng.standard_normal(problem.dim_x)
            y = 0.7 * rng.standard_normal(problem.dim_y)
            if problem.y_constraint == "simplex":
                y = problem.project_y(y)
            batch = problem.draw_batch(client, 3, rng)
            gx, gy = problem.batch_grads(client, batch, x, y)
            fx, fy = fd_batch_grads(problem, client, batch, x, y)
            ref = max(1.0, np.linalg.norm(np.concatenate([gx, gy])))
            assert np.linalg.norm(gx - fx) / ref < 1e-5
            assert np.linalg.norm(gy - fy) / ref < 1e-5

    def test_zero_noise_batch_equals_exact(self, noiseless_quadratic):
        p = noiseless_quadratic
        rng = rng_for(1)
        x = rng.standard_normal(p.dim_x)
        y = rng.standard_normal(p.dim_y)
        batch = p.draw_batch(1, 4, rng)
        gx, gy = p.batch_grads(1, batch, x, y)
        ex, ey = p.client_grads(1, x, y)
        np.testing.assert_allclose(gx, ex, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(gy, ey, rtol=1e-12, atol=1e-12)

    def test_stationary_origin(self):
        p = make_quadratic_saddle(d1=4, d2=4, num_clients=1, kappa=2, mu=1.0, seed=0,
                                  x_star_norm=1.0)
        # rebuild a pure bilinear instance by hand: hess=0, B=I, mu=1, lin=0
        from fedsaddle import QuadraticSaddle

        p = QuadraticSaddle(np.zeros((4, 4)), np.zeros(4), np.eye(4), 1.0)
        gx, gy = p.batch_grads(0, p.draw_batch(0, 2, rng_for(2)), np.zeros(4), np.zeros(4))
        assert np.all(gx == 0) and np.all(gy == 0)

    def test_unbiasedness(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(3)
        x = rng.standard_normal(p.dim_x)
        y = rng.standard_normal(p.dim_y)
        draws = 4000
        for client in range(p.num_clients):
            acc_x = np.zeros(p.dim_x)
            acc_y = np.zeros(p.dim_y)
            for _ in range(draws):
                gx, gy = sample_partial_grads(p, client, x, y, 2, rng)
                acc_x += gx
                acc_y += gy
            ex, ey = p.client_grads(client, x, y)
            # per-coordinate std of the mean estimate, 3-sigma band
            se = p.noise_sigma / np.sqrt(2 * draws)
            assert np.all(np.abs(acc_x / draws - ex) < 4 * se)
            assert np.all(np.abs(acc_y / draws - ey) < 4 * se)

    def test_unbiasedness_data_problem(self):
        p = make_fair_problem(n=60, num_classes=3, feature_dim=3, num_clients=2,
                              heterogeneity=10.0, seed=4)
        rng = rng_for(4)
        x = 0.3 * rng.standard_normal(p.dim_x)
        y = p.project_y(rng.standard_normal(p.dim_y))
        draws = 3000
        for client in range(p.num_clients):
            samples = [p.batch_grads(client, p.draw_batch(client, 1, rng), x, y) for _ in range(draws)]
            mean_x = np.mean([s[0] for s in samples], axis=0)
            mean_y = np.mean([s[1] for s in samples], axis=0)
            ex, ey = p.client_grads(client, x, y)
            std_x = np.std([s[0] for s in samples], axis=0) / np.sqrt(draws)
            std_y = np.std([s[1] for s in samples], axis=0) / np.sqrt(draws)
            assert np.all(np.abs(mean_x - ex) < 4 * std_x + 1e-12)
            assert np.all(np.abs(mean_y - ey) < 4 * std_y + 1e-12)

    def test_exact_full_grads_is_client_average(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(5)
        x = rng.standard_normal(p.dim_x)
        y = rng.standard_normal(p.dim_y)
        gx, gy = exact_full_grads(p, x, y)
        parts = [p.client_grads(i, x, y) for i in range(p.num_clients)]
        np.testing.assert_allclose(gx, np.mean([q[0] for q in parts], axis=0), rtol=1e-12)
        np.testing.assert_allclose(gy, np.mean([q[1] for q in parts], axis=0), rtol=1e-12)

    def test_quadratic_gy_closed_form(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(6)
        x = rng.standard_normal(p.dim_x)
        y = rng.standard_normal(p.dim_y)
        _, gy = p.full_grads(x, y)
        np.testing.assert_allclose(gy, p._coup.T @ x - p.mu * y, rtol=1e-12)

    def test_fair_uniform_y_identical_shards(self):
        feats, labels = make_blobs(90, 3, 4, seed=7)
        shard = DataShard(0, feats, labels)
        from fedsaddle import FairClassification

        # identical shards across clients
        shards = [DataShard(i, feats.copy(), labels.copy()) for i in range(3)]
        p = FairClassification(shards, 3, 4)
        rng = rng_for(7)
        x = 0.2 * rng.standard_normal(p.dim_x)
        y = np.full(3, 1 / 3)
        gx, _ = p.full_grads(x, y)
        # plain averaged cross-entropy gradient, classes reweighted equally
        w = x.reshape(3, 4)
        ce, soft = p._ce(w, feats, labels)
        counts = np.bincount(labels, minlength=3)
        coef = (1 / 3) / counts[labels]
        plain = np.einsum("b,bc,bk->ck", coef, soft, feats).ravel()
        np.testing.assert_allclose(gx, plain, rtol=1e-10)


class TestInnerMaximizer:
    def test_quadratic_closed_form(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(8)
        for _ in range(30):
            x = rng.standard_normal(p.dim_x)
            ystar = p.inner_maximizer(x)
            np.testing.assert_allclose(ystar, p._coup.T @ x / p.mu, rtol=1e-12)
            assert np.linalg.norm(p.full_grads(x, ystar)[1]) < 1e-10

    def test_identity_coupling(self):
        from fedsaddle import QuadraticSaddle

        p = QuadraticSaddle(np.zeros((2, 2)), np.zeros(2), np.eye(2), 1.0)
        np.testing.assert_allclose(p.inner_maximizer(np.array([1.0, 2.0])), [1.0, 2.0])

    def test_auroc_dual_vs_grid(self):
        p = make_auroc_problem(n=100, feature_dim=3, num_clients=2, heterogeneity=2.0,
                               eval_n=40, seed=9)
        rng = rng_for(9)
        for _ in range(5):
            x = rng.standard_normal(p.dim_x)
            wstar = p.inner_maximizer(x)[0]
            # brute-force 1-d grid refinement
            lo, hi = wstar - 2.0, wstar + 2.0
            for _ in range(6):
                grid = np.linspace(lo, hi, 41)
                vals = [p.full_value(x, np.array([w])) for w in grid]
                k = int(np.argmax(vals))
                lo, hi = grid[max(0, k - 1)], grid[min(40, k + 1)]
            assert abs((lo + hi) / 2 - wstar) < 1e-4
            assert abs(p.full_grads(x, np.array([wstar]))[1][0]) < 1e-10

    def test_fair_has_none(self):
        p = make_fair_problem(n=60, num_classes=3, feature_dim=3, num_clients=2, seed=3)
        assert p.inner_maximizer(np.zeros(p.dim_x)) is None

    def test_auroc_curvature_exact(self):
        p = make_auroc_problem(n=80, feature_dim=3, num_clients=2, eval_n=40, seed=1)
        rng = rng_for(11)
        for _ in range(5):
            x = rng.standard_normal(p.dim_x)
            w = rng.standard_normal(1)
            h = 0.37
            f0 = p.full_value(x, w)
            fp = p.full_value(x, w + h)
            fm = p.full_value(x, w - h)
            second = (fp - 2 * f0 + fm) / h**2
            assert abs(second + p.pl_const) < 1e-9


def simplex_project_enum(v):
    """Exhaustive support-set QP solve; independent of sort-and-threshold."""
    n = len(v)
    best = None
    for mask in range(1, 2**n):
        idx = np.array([i for i in range(n) if mask >> i & 1])
        y = np.zeros(n)
        y[idx] = v[idx] + (1.0 - v[idx].sum()) / len(idx)
        if np.all(y >= -1e-12):
            cost = float(np.sum((y - v) ** 2))
            if best is None or cost < best[0] - 1e-15:
                best = (cost, np.maximum(y, 0.0))
    return best[1]


class TestSimplexProjection:
    def test_feasible_fixed(self):
        np.testing.assert_allclose(project_simplex([0.5, 0.5]), [0.5, 0.5])

    def test_vertex(self):
        np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])

    def test_reference_point(self):
        got = project_simplex([0.3, 0.7, 0.5])
        np.testing.assert_allclose(got, simplex_project_enum(np.array([0.3, 0.7, 0.5])), atol=1e-12)
        np.testing.assert_allclose(got, [0.4 / 3, 0.4 / 3 + 0.4, 0.4 / 3 + 0.2], atol=1e-12)

    def test_against_enumeration(self):
        rng = rng_for(12)
        for _ in range(80):
            v = 2.0 * rng.standard_normal(int(rng.integers(2, 7)))
            got = project_simplex(v)
            want = simplex_project_enum(v)
            np.testing.assert_allclose(got, want, atol=1e-10)
            assert abs(got.sum() - 1.0) < 1e-12
            assert np.all(got >= 0)

    def test_idempotent_nonexpansive(self):
        rng = rng_for(13)
        for _ in range(300):
            v = 3.0 * rng.standard_normal(5)
            w = 3.0 * rng.standard_normal(5)
            pv, pw = project_simplex(v), project_simplex(w)
            np.testing.assert_allclose(project_simplex(pv), pv, atol=1e-12)
            assert np.linalg.norm(pv - pw) <= np.linalg.norm(v - w) + 1e-12


class TestSharding:
    def test_near_iid_frequencies(self):
        feats, labels = make_blobs(4000, 4, 3, seed=1)
        shards = make_heterogeneous_shards(feats, labels, 2, 1e6, seed=1)
        global_freq = np.bincount(labels, minlength=4) / len(labels)
        for shard in shards:
            freq = np.bincount(shard.labels, minlength=4) / len(shard)
            assert np.max(np.abs(freq - global_freq)) <= 0.02

    def test_single_client_identity(self):
        feats, labels = make_blobs(50, 3, 2, seed=2)
        (shard,) = make_heterogeneous_shards(feats, labels, 1, 0.5, seed=2)
        np.testing.assert_array_equal(shard.features, feats)
        np.testing.assert_array_equal(shard.labels, labels)

    def test_dispersion_monotone_in_heterogeneity(self):
        from fedsaddle import FairClassification
        from fedsaddle.metrics import estimate_assumption_constants

        feats, labels = make_blobs(400, 3, 4, seed=3)
        zetas = {}
        for het in (0.1, 100.0):
            vals = []
            for seed in range(20):
                shards = make_heterogeneous_shards(feats, labels, 4, het, seed=seed)
                p = FairClassification(shards, 3, 4)
                est = estimate_assumption_constants(p, probe_count=2, rng=rng_for(40 + seed),
                                                    samples_per_probe=2)
                vals.append(est.zeta2_hat)
            zetas[het] = np.mean(vals)
        assert zetas[0.1] > zetas[100.0]

    def test_deterministic_and_nonempty(self):
        feats, labels = make_blobs(64, 4, 3, seed=4)
        a = make_heterogeneous_shards(feats, labels, 8, 0.05, seed=9)
        b = make_heterogeneous_shards(feats, labels, 8, 0.05, seed=9)
        for sa, sb in zip(a, b):
            np.testing.assert_array_equal(sa.features, sb.features)
            assert len(sa) >= 1

    def test_rejects_negative_heterogeneity(self):
        feats, labels = make_blobs(30, 2, 2, seed=5)
        with pytest.raises(ValueError):
            make_heterogeneous_shards(feats, labels, 2, -0.1, seed=0)

    def test_csv_round_trip(self, tmp_path):
        feats, labels = make_imbalanced_binary(40, 3, seed=6)
        shards = make_heterogeneous_shards(feats, labels, 3, 0.7, seed=6)
        path = tmp_path / "shards.csv"
        shards_to_csv(shards, path)
        header = path.read_text().splitlines()[0]
        assert header == "client_id,label,f0,f1,f2"
        back = shards_from_csv(path)
        assert len(back) == len(shards)
        for sa, sb in zip(shards, back):
            assert sa.client_id == sb.client_id
            np.testing.assert_array_equal(sa.features, sb.features)
            np.testing.assert_array_equal(sa.labels, sb.labels)


class TestProblemStructure:
    def test_fair_linear_in_y(self):
        p = make_fair_problem(n=90, num_classes=3, feature_dim=4, num_clients=3, seed=8)
        rng = rng_for(14)
        x = 0.4 * rng.standard_normal(p.dim_x)
        for _ in range(20):
            y1 = p.project_y(rng.standard_normal(3))
            y2 = p.project_y(rng.standard_normal(3))
            t = float(rng.random())
            lhs = p.full_value(x, t * y1 + (1 - t) * y2)
            rhs = t * p.full_value(x, y1) + (1 - t) * p.full_value(x, y2)
            assert abs(lhs - rhs) < 1e-10

    def test_quadratic_exact_constants(self, small_quadratic):
        p = small_quadratic
        assert abs(p.lips_const - p.kappa * p.mu) < 1e-9
        assert abs(p.zeta2 - 0.8**2) < 1e-9
        assert abs(p.sigma2 - 0.2**2 * (p.dim_x + p.dim_y)) < 1e-12

    def test_quadratic_nonconvex_certified(self, small_quadratic):
        eigs = np.linalg.eigvalsh(small_quadratic._hess)
        assert eigs[0] < 0

    def test_invalid_dimensions_raise(self, small_quadratic):
        p = small_quadratic
        with pytest.raises(ValueError):
            p.batch_grads(0, p.draw_batch(0, 2, rng_for(15)), np.zeros(p.dim_x + 1), np.zeros(p.dim_y))
        with pytest.raises(ValueError):
            sample_partial_grads(p, p.num_clients + 3, np.zeros(p.dim_x), np.zeros(p.dim_y), 2, rng_for(16))

    def test_empty_shard_rejected(self):
        with pytest.raises(ValueError):
            DataShard(0, np.zeros((0, 3)), np.zeros(0, dtype=np.int64))


class TestLabelNoise:
    def test_train_flips_eval_clean(self):
        from fedsaddle import make_auroc_problem

        clean = make_auroc_problem(n=400, feature_dim=3, num_clients=2,
                                   heterogeneity=5.0, eval_n=100,
                                   label_noise=0.0, seed=17)
        noisy = make_auroc_problem(n=400, feature_dim=3, num_clients=2,
                                   heterogeneity=5.0, eval_n=100,
                                   label_noise=0.25, seed=17)
        clean_labels = np.concatenate([s.labels for s in clean.shards])
        noisy_labels = np.concatenate([s.labels for s in noisy.shards])
        frac_pos_clean = np.mean(clean_labels == 1)
        frac_pos_noisy = np.mean(noisy_labels == 1)
        assert abs(frac_pos_noisy - (frac_pos_clean * 0.75 + (1 - frac_pos_clean) * 0.25)) < 0.06
        np.testing.assert_array_equal(clean._eval[1], noisy._eval[1])
