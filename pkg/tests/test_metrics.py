import numpy as np
import pytest

from fedsaddle import QuadraticSaddle, make_fair_problem, make_quadratic_saddle
from fedsaddle.metrics import (
    auroc,
    estimate_assumption_constants,
    grad_phi,
    moreau_stationarity,
    primal_dual_gap,
    solve_inner_max,
    stationarity_report,
)
from conftest import rng_for


def bilinear_identity(d=5):
    """hess = 0, coupling = I, mu = 1: envelope is ||x||^2 / 2."""
    return QuadraticSaddle(np.zeros((d, d)), np.zeros(d), np.eye(d), 1.0)


class TestGradPhi:
    def test_linear_hessian_free_case(self):
        # hess = 0 with linear term: grad phi = lin + B B' x / mu
        rng = rng_for(60)
        d1, d2 = 5, 4
        lin = rng.standard_normal(d1)
        coup = rng.standard_normal((d1, d2))
        p = QuadraticSaddle(np.zeros((d1, d1)), lin, coup, 2.0)
        for _ in range(10):
            x = rng.standard_normal(d1)
            want = lin + coup @ coup.T @ x / 2.0
            got, method = grad_phi(p, x)
            assert method == "closed-form"
            assert abs(got - np.linalg.norm(want)) < 1e-12

    def test_zero_at_stationary_point(self, small_quadratic):
        p = small_quadratic
        norm, _ = grad_phi(p, p.stationary_x)
        assert norm < 1e-8

    def test_inner_solver_matches_closed_form(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(61)
        for _ in range(20):
            x = rng.standard_normal(p.dim_x)
            closed, _ = grad_phi(p, x, method="closed-form")
            ystar = solve_inner_max(p, x, tolerance=1e-9)
            solver = np.linalg.norm(p.full_grads(x, ystar)[0])
            assert abs(solver - closed) < 1e-6


class TestMoreau:
    def test_closed_form_two_thirds(self):
        p = bilinear_identity()
        rng = rng_for(62)
        for _ in range(5):
            x = rng.standard_normal(5)
            got = moreau_stationarity(p, x, lam=0.5, tolerance=1e-8)
            assert abs(got - (2.0 / 3.0) * np.linalg.norm(x)) < 1e-6

    def test_zero_at_minimizer(self):
        p = bilinear_identity()
        assert moreau_stationarity(p, np.zeros(5), lam=0.5, tolerance=1e-8) < 1e-8

    def test_translation_invariance(self):
        # shifting F by a constant (y-independent linear term moved into the
        # value) must not change the prox displacement
        rng = rng_for(63)
        d = 4
        coup = rng.standard_normal((d, d))
        p = QuadraticSaddle(np.zeros((d, d)), np.zeros(d), coup, 1.5)
        x = rng.standard_normal(d)
        a = moreau_stationarity(p, x, lam=0.2, tolerance=1e-8)

        class Shifted(QuadraticSaddle):
            def phi_subgrad(self, z):
                val, g = super().phi_subgrad(z)
                return val + 17.3, g

        q = Shifted(np.zeros((d, d)), np.zeros(d), coup, 1.5)
        b = moreau_stationarity(q, x, lam=0.2, tolerance=1e-8)
        # identical up to the float resolution lost to the value shift
        assert abs(a - b) < 1e-7

    def test_fair_nonnegative_and_sensitive(self):
        p = make_fair_problem(n=90, num_classes=3, feature_dim=4, num_clients=3,
                              heterogeneity=0.5, seed=12)
        x0 = np.zeros(p.dim_x)
        val = moreau_stationarity(p, x0, tolerance=1e-3)
        assert val > 0

    def test_fair_decreases_along_descent(self):
        # strongly convex in x surrogate: all class losses share a common
        # minimizer direction when shards are identical and separable
        p = make_fair_problem(n=120, num_classes=3, feature_dim=4, num_clients=2,
                              heterogeneity=1e6, separation=3.0, seed=13)
        x = np.zeros(p.dim_x)
        vals = [moreau_stationarity(p, x, tolerance=1e-3)]
        for _ in range(12):
            _, g = p.phi_subgrad(x)
            x = x - 0.3 * g
            vals.append(moreau_stationarity(p, x, tolerance=1e-3))
        assert np.mean(vals[-4:]) < np.mean(vals[:4])
        assert p.phi(x) < p.phi(np.zeros(p.dim_x))


class TestPrimalDualGap:
    def test_zero_at_inner_max(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(64)
        x = rng.standard_normal(p.dim_x)
        assert primal_dual_gap(p, x, p.inner_maximizer(x)) < 1e-8

    def test_quadratic_closed_form(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(65)
        for _ in range(20):
            x = rng.standard_normal(p.dim_x)
            y = rng.standard_normal(p.dim_y)
            gap = primal_dual_gap(p, x, y)
            want = 0.5 * p.mu * np.sum((y - p.inner_maximizer(x)) ** 2)
            assert abs(gap - want) < 1e-9

    def test_pl_inequality(self, small_quadratic):
        # ||grad_y F||^2 <= 2 L gap
        p = small_quadratic
        rng = rng_for(66)
        for _ in range(200):
            x = rng.standard_normal(p.dim_x)
            y = rng.standard_normal(p.dim_y)
            gy = p.full_grads(x, y)[1]
            gap = primal_dual_gap(p, x, y)
            assert gy @ gy <= 2 * p.lips_const * gap + 1e-9


class TestAuroc:
    def test_perfect_and_tied(self):
        assert auroc([0.9, 0.1], [1, -1]) == 1.0
        assert auroc([0.5, 0.5, 0.5, 0.5], [1, -1, 1, -1]) == 0.5

    def test_matches_pairwise_bruteforce(self):
        rng = rng_for(67)
        for _ in range(20):
            n = 50
            scores = np.round(rng.standard_normal(n), 1)  # force ties
            labels = np.where(rng.random(n) < 0.3, 1, -1)
            if labels.max() == labels.min():
                labels[0] = -labels[0]
            pos = scores[labels == 1]
            neg = scores[labels == -1]
            wins = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg)
            want = wins / (len(pos) * len(neg))
            assert abs(auroc(scores, labels) - want) < 1e-12

    def test_monotone_transform_invariant(self):
        rng = rng_for(68)
        scores = rng.standard_normal(40)
        labels = np.where(rng.random(40) < 0.4, 1, -1)
        labels[:2] = [1, -1]
        base = auroc(scores, labels)
        assert auroc(np.exp(scores), labels) == pytest.approx(base)
        assert auroc(3 * scores - 7, labels) == pytest.approx(base)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            auroc([0.1, 0.2], [1, 1])


class TestAssumptionEstimates:
    def test_zero_noise_zero_sigma(self, noiseless_quadratic):
        est = estimate_assumption_constants(noiseless_quadratic, probe_count=4,
                                            rng=rng_for(69), samples_per_probe=8)
        assert est.sigma2_hat < 1e-12

    def test_identical_shards_zero_zeta(self):
        p = make_quadratic_saddle(d1=4, d2=3, num_clients=4, kappa=4, mu=1.0,
                                  noise_sigma=0.1, zeta=0.0, seed=70)
        est = estimate_assumption_constants(p, probe_count=4, rng=rng_for(70),
                                            samples_per_probe=8)
        assert est.zeta2_hat < 1e-12

    def test_sigma2_matches_analytic(self, small_quadratic):
        p = small_quadratic  # noise_sigma=0.2 per coordinate, 11 coords
        est = estimate_assumption_constants(p, probe_count=4, rng=rng_for(71),
                                            samples_per_probe=2500)
        want = p.sigma2
        assert abs(est.sigma2_hat - want) / want < 0.2

    def test_l_and_mu_bracket_truth(self, small_quadratic):
        p = small_quadratic
        est = estimate_assumption_constants(p, probe_count=12, rng=rng_for(72),
                                            samples_per_probe=4)
        assert est.L_hat <= p.lips_const + 1e-9
        assert est.L_hat > 0.3 * p.lips_const
        assert est.mu_hat >= p.mu - 1e-9  # PL ratio lower-bounded by modulus
        assert est.gx_hat > 0

    def test_zeta2_matches_analytic(self, small_quadratic):
        p = small_quadratic
        est = estimate_assumption_constants(p, probe_count=6, rng=rng_for(73),
                                            samples_per_probe=2)
        assert abs(est.zeta2_hat - p.zeta2) / p.zeta2 < 1e-9


class TestConsistencyIdentities:
    def test_ystar_lipschitz(self, small_quadratic):
        p = small_quadratic
        rng = rng_for(74)
        kap = p.lips_const / p.mu
        for _ in range(100):
            x1 = rng.standard_normal(p.dim_x)
            x2 = rng.standard_normal(p.dim_x)
            lhs = np.linalg.norm(p.inner_maximizer(x1) - p.inner_maximizer(x2))
            assert lhs <= kap * np.linalg.norm(x1 - x2) + 1e-10

    def test_quadratic_growth(self, small_quadratic):
        # gap >= (mu/2) ||y - y*||^2 (equality for the quadratic family)
        p = small_quadratic
        rng = rng_for(75)
        for _ in range(100):
            x = rng.standard_normal(p.dim_x)
            y = rng.standard_normal(p.dim_y)
            gap = primal_dual_gap(p, x, y)
            dist2 = np.sum((y - p.inner_maximizer(x)) ** 2)
            assert gap >= 0.5 * p.mu * dist2 - 1e-9

    def test_report_populates(self, small_quadratic):
        rep = stationarity_report(small_quadratic, np.zeros(small_quadratic.dim_x),
                                  np.zeros(small_quadratic.dim_y))
        assert rep.grad_phi_norm is not None and rep.grad_phi_norm >= 0
        assert rep.primal_dual_gap is not None and rep.primal_dual_gap >= -1e-9
        assert rep.method == "closed-form"
