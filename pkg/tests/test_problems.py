import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynoracle.functions import QuadraticFunction, SectorPair, SmoothFunction, grad_check, sector_check
from dynoracle.problems import (
    ExactOracleUnavailable,
    MinimaxProblem,
    RankDeficientError,
    derive_constants,
    equality_constrained_builder,
    load_problem,
    phi,
    primal_gradient,
    primal_value,
    problem_from_dict,
    problem_to_dict,
    random_quadratic_instance,
    saddle_point,
    save_problem,
)


def make(A, mu_g=1.0, beta_g=None, beta_f=0.0, b=None):
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    beta_g = mu_g if beta_g is None else beta_g
    lam = np.linspace(mu_g, beta_g, m)
    g = QuadraticFunction(np.diag(lam))
    if beta_f:
        f = QuadraticFunction(beta_f * np.eye(n))
    else:
        f = QuadraticFunction.linear(np.zeros(n) if b is None else -np.asarray(b, float))
    return MinimaxProblem(f, g, A)


class TestConstants:
    def test_identity(self):
        c = derive_constants(make(np.eye(2)))
        assert (c.mu_p, c.beta_p, c.alpha_p, c.alpha_g, c.beta_psi) == pytest.approx((1, 1, 0.5, 0.5, 1))

    def test_diag(self):
        c = derive_constants(make(np.diag([3.0, 1.0]), 1.0, 2.0, beta_f=1.0))
        assert (c.mu_p, c.beta_p, c.beta_psi) == pytest.approx((0.5, 10.0, 3.0))

    @pytest.mark.parametrize("t", [0.5, 2.0, 7.0])
    def test_scaling(self, t, rng):
        A = rng.standard_normal((5, 3))
        c1 = derive_constants(make(A, 1.0, 3.0, beta_f=2.0))
        ct = derive_constants(make(t * A, 1.0, 3.0, beta_f=2.0))
        assert ct.mu_p == pytest.approx(t * t * c1.mu_p)
        assert ct.beta_p - ct.beta_f == pytest.approx(t * t * (c1.beta_p - c1.beta_f))

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientError, match="full column rank"):
            derive_constants(make([[1.0, 1.0], [1.0, 1.0]]))

    def test_g_must_be_strongly_convex(self):
        with pytest.raises(ValueError):
            MinimaxProblem(QuadraticFunction.linear([0.0]), QuadraticFunction.linear([0.0]), np.eye(1))

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            MinimaxProblem(QuadraticFunction.linear([0.0, 0.0]), QuadraticFunction(np.eye(1)), np.eye(1))


class TestPrimal:
    def test_identity_problem(self, rng):
        prob = make(np.eye(3))
        x = rng.standard_normal(3)
        np.testing.assert_allclose(primal_gradient(prob, x), x)

    def test_zero_at_saddle(self):
        prob = random_quadratic_instance(6, 8, 5.0, 3)
        sp = saddle_point(prob)
        assert np.linalg.norm(primal_gradient(prob, sp.x_star)) < 1e-10

    def test_finite_differences(self, rng):
        prob = random_quadratic_instance(5, 7, 10.0, 11)
        p = SmoothFunction(lambda x: primal_value(prob, x), lambda x: primal_gradient(prob, x), 0.0, 1.0)
        for _ in range(20):
            assert grad_check(p, rng.standard_normal(5), 1e-5) < 1e-6

    def test_needs_quadratic_g(self):
        g = SmoothFunction(lambda y: 0.5 * float(y @ y), lambda y: y, 1.0, 1.0, dim=1)
        prob = MinimaxProblem(QuadraticFunction.linear([0.0]), g, np.eye(1))
        with pytest.raises(ExactOracleUnavailable):
            primal_gradient(prob, [1.0])
        with pytest.raises(ExactOracleUnavailable):
            saddle_point(prob)

    def test_phi_stack(self, rng):
        prob = random_quadratic_instance(3, 4, 3.0, 1)
        X = rng.standard_normal((5, 3))
        np.testing.assert_allclose(phi(prob, X), np.array([phi(prob, x) for x in X]), atol=1e-13)

    def test_primal_in_sector(self, rng):
        prob = random_quadratic_instance(4, 6, 8.0, 5)
        c = prob.constants
        for _ in range(300):
            x, xp = rng.standard_normal(4), rng.standard_normal(4)
            pair = SectorPair(x - xp, primal_gradient(prob, x) - primal_gradient(prob, xp))
            assert sector_check(c.mu_p, c.beta_p, pair, tol=1e-10)


class TestSaddlePoint:
    def test_scalar_origin(self):
        sp = saddle_point(make([[1.0]]))
        assert sp.x_star == pytest.approx([0.0]) and sp.y_star == pytest.approx([0.0])

    def test_linear_f(self, rng):
        b = rng.standard_normal(3)
        sp = saddle_point(make(np.eye(3), b=b))
        np.testing.assert_allclose(sp.x_star, b)
        np.testing.assert_allclose(sp.y_star, b)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 6), st.floats(1.0, 50.0), st.integers(0, 2**31 - 1))
    def test_residuals(self, n, extra, kappa, seed):
        m = n + extra
        if m == 1:
            kappa = 1.0
        prob = random_quadratic_instance(n, m, kappa, seed)
        sp = saddle_point(prob)
        assert prob.residual(sp.x_star, sp.y_star) < 1e-10 * max(1.0, np.linalg.norm(sp.x_star))

    def test_fallback(self):
        g = SmoothFunction(lambda y: 0.5 * float(y @ y), lambda y: y, 1.0, 1.0, dim=1)
        prob = MinimaxProblem(QuadraticFunction.linear([0.0]), g, np.eye(1))
        sp = saddle_point(prob, fallback=lambda p: "sentinel")
        assert sp == "sentinel"


class TestGenerator:
    def test_kappa_one(self):
        prob = random_quadratic_instance(3, 3, 1.0, 0)
        np.testing.assert_allclose(prob.g.Q, np.eye(3), atol=1e-14)

    def test_deterministic(self):
        a = random_quadratic_instance(4, 6, 5.0, 42)
        b = random_quadratic_instance(4, 6, 5.0, 42)
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.g.Q, b.g.Q)
        np.testing.assert_array_equal(a.f.q, b.f.q)

    @pytest.mark.parametrize("kappa", [1.0, 2.5, 20.0, 100.0])
    def test_constants(self, kappa):
        c = random_quadratic_instance(5, 8, kappa, 1).constants
        assert c.mu_g == pytest.approx(1.0, abs=1e-10)
        assert c.beta_g == pytest.approx(kappa, rel=1e-10)
        assert c.beta_f == 0.0
        # the measured spectrum agrees with the declared constants
        eig = np.linalg.eigvalsh(random_quadratic_instance(5, 8, kappa, 1).g.Q)
        assert eig[0] == pytest.approx(1.0, rel=1e-10) and eig[-1] == pytest.approx(kappa, rel=1e-10)

    def test_sigma_recipe(self):
        c = random_quadratic_instance(4, 6, 3.0, 2, sigma_max=2.0).constants
        assert (c.sigma_min, c.sigma_max) == pytest.approx((1.0, 2.0))

    @pytest.mark.parametrize("n,m,kappa", [(0, 2, 1.0), (3, 2, 1.0), (2, 2, 0.5), (1, 1, 2.0)])
    def test_invalid(self, n, m, kappa):
        with pytest.raises(ValueError):
            random_quadratic_instance(n, m, kappa, 0)


class TestEqualityConstrained:
    def test_scalar_substitution(self):
        prob = equality_constrained_builder(QuadraticFunction(np.eye(1)), [[1.0]], [0.0], 1.0)
        for y in (-2.0, 0.5, 3.0):
            assert prob.g.value([y]) == pytest.approx(y * y)

    def test_zero_b(self, rng):
        g = QuadraticFunction(np.diag([1.0, 2.0, 3.0]))
        prob = equality_constrained_builder(g, rng.standard_normal((3, 2)), np.zeros(2), 0.3)
        assert prob.f.is_linear and not np.any(prob.f.q)

    def test_feasible_optimum(self, rng):
        m, n = 6, 3
        B = rng.standard_normal((m, m))
        g = QuadraticFunction(B @ B.T + np.eye(m), rng.standard_normal(m))
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(n)
        for eta1 in (0.1, 1.0):
            sp = saddle_point(equality_constrained_builder(g, A, b, eta1))
            assert np.linalg.norm(A.T @ sp.y_star - b) < 1e-8

    def test_constants_updated(self, rng):
        g = QuadraticFunction(np.diag([1.0, 2.0]))
        A = rng.standard_normal((2, 2))
        eta1 = 0.5
        prob = equality_constrained_builder(g, A, np.ones(2), eta1)
        smax = np.linalg.svd(A, compute_uv=False)[0]
        assert prob.g.mu >= g.mu - 1e-12
        assert prob.g.beta <= g.beta + eta1 * smax ** 2 + 1e-12

    def test_generic_g(self):
        g = SmoothFunction(lambda y: 0.5 * float(y @ y), lambda y: y, 1.0, 1.0, dim=1)
        prob = equality_constrained_builder(g, [[2.0]], [1.0], 0.5)
        np.testing.assert_allclose(prob.g.gradient(np.array([1.0])), [1.0 + 0.5 * 2.0 * (2.0 - 1.0)])
        assert prob.g.beta == pytest.approx(1.0 + 0.5 * 4.0)

    def test_penalty_override(self):
        g = QuadraticFunction(np.eye(1))
        prob = equality_constrained_builder(g, [[1.0]], [0.0], 1.0, penalty=3.0)
        assert prob.g.value([1.0]) == pytest.approx(0.5 + 1.5)

    def test_eta1_positive(self):
        with pytest.raises(ValueError):
            equality_constrained_builder(QuadraticFunction(np.eye(1)), [[1.0]], [0.0], 0.0)


class TestSerialisation:
    def test_roundtrip_exact(self, tmp_path):
        prob = random_quadratic_instance(4, 5, 7.0, 9)
        path = tmp_path / "p.json"
        save_problem(prob, path)
        back = load_problem(path)
        np.testing.assert_array_equal(back.A, prob.A)
        np.testing.assert_array_equal(back.g.Q, prob.g.Q)
        np.testing.assert_array_equal(back.g.q, prob.g.q)
        np.testing.assert_array_equal(back.f.q, prob.f.q)
        assert back.seed == 9

    def test_quadratic_f(self):
        prob = make(np.eye(2), beta_f=2.0)
        back = problem_from_dict(problem_to_dict(prob))
        np.testing.assert_array_equal(back.f.Q, prob.f.Q)

    def test_schema(self):
        doc = problem_to_dict(random_quadratic_instance(2, 3, 2.0, 1))
        assert set(doc) == {"n", "m", "A", "g", "f", "seed"}
        assert {"Q", "q"} <= set(doc["g"]) and set(doc["f"]) == {"b"}
        assert math.isfinite(doc["A"][0][0])
