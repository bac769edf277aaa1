import numpy as np
import pytest

from fedsaddle.estimators import (
    MomentumState,
    VrEstimatorState,
    estimator_error,
    vr_init,
    vr_update,
)
from conftest import rng_for


class TestVrInit:
    def test_zero_noise_exact(self, noiseless_quadratic):
        p = noiseless_quadratic
        rng = rng_for(30)
        x0 = rng.standard_normal(p.dim_x)
        y0 = rng.standard_normal(p.dim_y)
        st = vr_init(p, 2, x0, y0, 4, rng, 0.1, 0.1)
        ex, ey = p.client_grads(2, x0, y0)
        np.testing.assert_allclose(st.u, ex, rtol=1e-12)
        np.testing.assert_allclose(st.v, ey, rtol=1e-12)
        np.testing.assert_array_equal(st.prev_x, x0)

    def test_variance_shrinks_with_batch(self, small_quadratic):
        p = small_quadratic
        x0 = np.zeros(p.dim_x)
        y0 = np.zeros(p.dim_y)
        ex, _ = p.client_grads(0, x0, y0)
        var = {}
        for B in (1, 8, 64):
            errs = []
            for seed in range(100):
                st = vr_init(p, 0, x0, y0, B, rng_for(31, seed), 0.5, 0.5)
                errs.append(np.sum((st.u - ex) ** 2))
            var[B] = np.mean(errs)
        assert var[64] < var[8] < var[1]

    def test_centered_zero_start(self):
        from fedsaddle import QuadraticSaddle

        p = QuadraticSaddle(np.zeros((3, 3)), np.zeros(3), np.eye(3), 1.0)
        st = vr_init(p, 0, np.zeros(3), np.zeros(3), 3, rng_for(32), 1.0, 1.0)
        assert np.all(st.u == 0) and np.all(st.v == 0)

    def test_rejects_bad_batch(self, small_quadratic):
        with pytest.raises(ValueError):
            vr_init(small_quadratic, 0, np.zeros(6), np.zeros(5), 0, rng_for(33), 0.5, 0.5)

    def test_coefficient_range_enforced(self):
        with pytest.raises(ValueError):
            VrEstimatorState(np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(2), 0.0, 0.5)
        with pytest.raises(ValueError):
            MomentumState(np.zeros(2), np.zeros(2), 1.0)


class TestVrUpdate:
    def test_alpha_one_is_plain_minibatch(self, small_quadratic):
        p = small_quadratic
        rng_a = rng_for(34)
        rng_b = rng_for(34)
        x0 = np.zeros(p.dim_x)
        y0 = np.zeros(p.dim_y)
        st = vr_init(p, 1, x0, y0, 2, rng_for(35), 1.0, 1.0)
        x1 = np.ones(p.dim_x)
        y1 = np.ones(p.dim_y)
        vr_update(st, p, 1, x1, y1, 3, rng_a)
        batch = p.draw_batch(1, 3, rng_b)
        gx, _ = p.batch_grads(1, batch, x1, y1)
        np.testing.assert_array_equal(st.u, gx)

    def test_scalar_arithmetic(self):
        # g_new = 3, g_old = 2, u = 5, alpha = 0.5 -> 3 + 0.5 * (5 - 2) = 4.5
        class Scalar:
            dim_x = dim_y = 1

            def draw_batch(self, client, b, rng):
                return None

            def vr_update_inplace(self, client, x, y, px, py, u, v, batch, alpha, beta):
                gxn = np.array([3.0])
                gxo = np.array([2.0])
                u[:] = gxn + (1 - alpha) * (u - gxo)
                px[:] = x

        st = VrEstimatorState(np.array([5.0]), np.array([0.0]), np.zeros(1), np.zeros(1), 0.5, 0.5)
        vr_update(st, Scalar(), 0, np.zeros(1), np.zeros(1), 1, None)
        assert st.u[0] == 4.5

    def test_exactness_preserved_zero_noise(self, noiseless_quadratic):
        p = noiseless_quadratic
        rng = rng_for(36)
        x = rng.standard_normal(p.dim_x)
        y = rng.standard_normal(p.dim_y)
        st = vr_init(p, 0, x, y, 2, rng, 0.3, 0.3)
        for _ in range(5):
            x = x + 0.05 * rng.standard_normal(p.dim_x)
            y = y + 0.05 * rng.standard_normal(p.dim_y)
            vr_update(st, p, 0, x, y, 2, rng)
            ex, ey = p.client_grads(0, x, y)
            np.testing.assert_allclose(st.u, ex, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(st.v, ey, rtol=1e-10, atol=1e-12)

    def test_uninitialized_rejected(self, small_quadratic):
        st = VrEstimatorState(np.zeros(6), np.zeros(5), np.zeros(6), np.zeros(5), 0.5, 0.5)
        st.u = None
        with pytest.raises(RuntimeError):
            vr_update(st, small_quadratic, 0, np.zeros(6), np.zeros(5), 2, rng_for(37))

    def test_determinism(self, small_quadratic):
        p = small_quadratic

        def run():
            rng = rng_for(38)
            st = vr_init(p, 0, np.zeros(p.dim_x), np.zeros(p.dim_y), 2, rng_for(39), 0.2, 0.4)
            for k in range(10):
                vr_update(st, p, 0, np.full(p.dim_x, 0.1 * k), np.full(p.dim_y, -0.05 * k), 2, rng)
            return st

        a, b = run(), run()
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)

    def test_collapse_is_history_free(self, small_quadratic):
        p = small_quadratic

        def run(u0_scale):
            rng = rng_for(40)
            st = vr_init(p, 0, np.zeros(p.dim_x), np.zeros(p.dim_y), 2, rng_for(41), 1.0, 1.0)
            st.u *= u0_scale
            st.v *= u0_scale
            for k in range(3):
                vr_update(st, p, 0, np.full(p.dim_x, 0.1 * k), np.full(p.dim_y, 0.2 * k), 2, rng)
            return st

        a, b = run(1.0), run(-7.5)
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)

    def test_innovation_unbiased(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(42)
        x_new = rng.standard_normal(p.dim_x)
        y_new = rng.standard_normal(p.dim_y)
        x_old = rng.standard_normal(p.dim_x)
        y_old = rng.standard_normal(p.dim_y)
        exact = p.client_grads(0, x_new, y_new)[0] - p.client_grads(0, x_old, y_old)[0]
        draws = 2000
        diffs = []
        for _ in range(draws):
            batch = p.draw_batch(0, 2, rng)
            gn = p.batch_grads(0, batch, x_new, y_new)[0]
            go = p.batch_grads(0, batch, x_old, y_old)[0]
            diffs.append(gn - go)
        mean = np.mean(diffs, axis=0)
        se = np.std(diffs, axis=0) / np.sqrt(draws)
        assert np.all(np.abs(mean - exact) <= 3 * se + 1e-12)


class TestEstimatorError:
    def test_zero_after_init_zero_noise(self, noiseless_quadratic):
        p = noiseless_quadratic
        x0 = np.ones(p.dim_x)
        y0 = np.ones(p.dim_y)
        st = vr_init(p, 1, x0, y0, 2, rng_for(43), 0.5, 0.5)
        ex, ey = estimator_error(st, p, 1, x0, y0)
        assert ex < 1e-12 and ey < 1e-12

    def test_variance_reduction_on_frozen_trajectory(self, small_quadratic):
        p = small_quadratic
        traj_rng = rng_for(44)
        steps = 200
        xs = np.cumsum(0.02 * traj_rng.standard_normal((steps, p.dim_x)), axis=0)
        ys = np.cumsum(0.02 * traj_rng.standard_normal((steps, p.dim_y)), axis=0)
        means = {}
        for alpha in (0.01, 1.0):
            errs = []
            for seed in range(10):
                rng_init = rng_for(45, seed)
                rng_batches = rng_for(46, seed)
                st = vr_init(p, 0, xs[0], ys[0], 2, rng_init, alpha, alpha)
                for t in range(1, steps):
                    vr_update(st, p, 0, xs[t], ys[t], 2, rng_batches)
                    errs.append(estimator_error(st, p, 0, xs[t], ys[t])[0])
            means[alpha] = np.mean(errs)
        assert means[0.01] < means[1.0] / 2
