import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynoracle.functions import QuadraticFunction, SmoothFunction
from dynoracle.oracles import (
    NesterovAdmissibilityWarning,
    OracleParams,
    OracleState,
    definition1_probe,
    exact_oracle,
    gd_params,
    heavy_ball_params,
    mode_matrix,
    nesterov_params,
    oracle_init,
    oracle_output,
    oracle_step,
    polyak_heavy_ball,
    preset_params,
)
from dynoracle.problems import random_quadratic_instance, saddle_point

HALF_SQUARE = QuadraticFunction(np.eye(1))


class TestParams:
    def test_eta2_positive(self):
        with pytest.raises(ValueError):
            OracleParams(0, 0, 0, 0.0)

    @pytest.mark.parametrize("mu,beta,eta2", [(1, 1, 1.0), (1, 3, 0.5)])
    def test_gd(self, mu, beta, eta2):
        p = gd_params(mu, beta)
        assert (p.c1, p.c2, p.c3) == (0, 0, 0) and p.eta2 == pytest.approx(eta2)

    @pytest.mark.parametrize("mu,beta,gamma,eta2", [(1, 9, 0.5, 1 / 9), (1, 4, 1 / 3, 0.25), (2, 2, 0.0, 0.5)])
    def test_nesterov(self, mu, beta, gamma, eta2):
        p = nesterov_params(mu, beta)
        assert p.c1 == pytest.approx(gamma) and p.c2 == pytest.approx(gamma)
        assert p.c3 == 0 and p.eta2 == pytest.approx(eta2)

    def test_nesterov_gate(self):
        with pytest.warns(NesterovAdmissibilityWarning):
            nesterov_params(1, 50)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            nesterov_params(1, 50, max_kappa=None)
            nesterov_params(1, 10)

    def test_heavy_ball(self):
        p = heavy_ball_params(0.2, 0.1)
        assert (p.c1, p.c2, p.c3, p.eta2) == (0.2, 0, 0, 0.1)
        q = polyak_heavy_ball(1, 9)
        assert q.c1 == pytest.approx(0.25) and q.eta2 == pytest.approx(0.25)

    def test_presets(self):
        assert preset_params("exact", 1, 2) == "exact"
        assert preset_params("gd", 1, 3).eta2 == pytest.approx(0.5)
        assert preset_params("heavy-ball", 1, 9, eta2=0.1).eta2 == 0.1
        with pytest.raises(ValueError):
            preset_params("foo", 1, 2)

    def test_state_dims(self):
        with pytest.raises(ValueError):
            OracleState(np.zeros(2), np.zeros(3))


class TestInitAndStep:
    def test_init_zero(self):
        s = oracle_init(gd_params(1, 1), np.zeros(3))
        np.testing.assert_array_equal(s.xi1, 0) and np.testing.assert_array_equal(s.xi2, 0)

    @given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-5, 5))
    def test_init_output_is_y0(self, c2, c3, y):
        p = OracleParams(0.3, c2, c3, 0.1)
        out = oracle_output(p, oracle_init(p, [y]))
        assert out.y[0] == pytest.approx(y, abs=1e-12) and out.v[0] == pytest.approx(y, abs=1e-12)

    def test_gd_hand_step(self):
        s, _ = oracle_step(OracleParams(0, 0, 0, 0.5), oracle_init(gd_params(1, 1), [0.0]),
                           HALF_SQUARE, np.eye(1), np.array([1.0]))
        assert oracle_output(OracleParams(0, 0, 0, 0.5), s).y[0] == 0.5

    def test_nesterov_hand_step(self):
        p = nesterov_params(1, 9)
        s, first = oracle_step(p, oracle_init(p, [0.0]), HALF_SQUARE, np.eye(1), np.array([1.0]))
        assert first.v[0] == 0.0
        assert s.xi1[0] == pytest.approx(1 / 9)
        assert oracle_output(p, s).y[0] == pytest.approx(1 / 9)

    def test_fixed_point(self, rng):
        prob = random_quadratic_instance(3, 4, 5.0, 0)
        x = rng.standard_normal(3)
        y = exact_oracle(prob.g, prob.A, x)
        p = gd_params(1, 5)
        s, _ = oracle_step(p, oracle_init(p, y), prob.g, prob.A, x)
        np.testing.assert_allclose(s.xi1, y, atol=1e-14)

    def test_gd_matches_plain_recursion(self, rng):
        prob = random_quadratic_instance(3, 5, 4.0, 2)
        p = gd_params(1, 4)
        s = oracle_init(p, np.zeros(5))
        y = np.zeros(5)
        for _ in range(30):
            x = rng.standard_normal(3)
            s, _ = oracle_step(p, s, prob.g, prob.A, x)
            y = y + p.eta2 * (prob.A @ x - prob.g.gradient(y))
            np.testing.assert_array_equal(s.xi1, y)

    def test_warm_start(self, rng):
        prob = random_quadratic_instance(2, 3, 3.0, 1)
        p = nesterov_params(1, 3)
        x = rng.standard_normal(2)
        s = oracle_init(p, np.zeros(3))
        for _ in range(10):
            s, _ = oracle_step(p, s, prob.g, prob.A, x)
        t = oracle_init(p, np.zeros(3))
        for _ in range(4):
            t, _ = oracle_step(p, t, prob.g, prob.A, x)
        for _ in range(6):
            t, _ = oracle_step(p, t, prob.g, prob.A, x)
        np.testing.assert_array_equal(s.xi1, t.xi1)
        np.testing.assert_array_equal(s.xi2, t.xi2)


class TestExactOracle:
    def test_hand(self):
        np.testing.assert_allclose(exact_oracle(QuadraticFunction(2 * np.eye(2)), np.eye(2), [2, 4]), [1, 2])

    def test_zero(self):
        assert not np.any(exact_oracle(QuadraticFunction(np.eye(2)), np.eye(2), [0, 0]))

    def test_inverse(self, rng):
        prob = random_quadratic_instance(3, 5, 10.0, 4)
        x = rng.standard_normal(3)
        np.testing.assert_allclose(prob.g.gradient(exact_oracle(prob.g, prob.A, x)), prob.A @ x, atol=1e-10)

    def test_needs_quadratic(self):
        g = SmoothFunction(lambda y: 0.5 * float(y @ y), lambda y: y, 1.0, 1.0)
        with pytest.raises(TypeError):
            exact_oracle(g, np.eye(1), [1.0])


def _budget(kappa):
    return math.ceil(10 * kappa * math.log(1e8))


class TestErrorProbe:
    @pytest.mark.parametrize("kappa", [1.0, 10.0, 100.0])
    def test_gd_constant_input(self, kappa):
        prob = random_quadratic_instance(4, 6, kappa, 3)
        xs = saddle_point(prob).x_star
        p = gd_params(1.0, kappa)
        errs = definition1_probe(p, prob.g, prob.A, [xs] * _budget(kappa))
        alpha_g = kappa / (1 + kappa)
        live = errs[:-1] > 1e-12
        ratios = errs[1:][live] / errs[:-1][live]
        assert np.all(ratios <= 1 - alpha_g * p.eta2 + 1e-10)
        assert errs[-1] < 1e-8

    def test_fixed_point_start(self):
        prob = random_quadratic_instance(3, 3, 5.0, 1)
        xs = saddle_point(prob).x_star
        errs = definition1_probe(gd_params(1, 5), prob.g, prob.A, [xs] * 50,
                                 y0=exact_oracle(prob.g, prob.A, xs))
        assert np.max(errs) < 1e-12

    @pytest.mark.parametrize("preset", ["gd", "nesterov", "heavy-ball"])
    @pytest.mark.parametrize("kind", ["constant", "geometric", "perturbed"])
    def test_convergent_inputs(self, preset, kind, rng):
        kappa = 8.0
        prob = random_quadratic_instance(3, 5, kappa, 6)
        xs = saddle_point(prob).x_star
        K = _budget(kappa)
        x0 = xs + rng.standard_normal(3)
        if kind == "constant":
            seq = [xs] * K
        elif kind == "geometric":
            seq = [xs + 0.97 ** k * (x0 - xs) for k in range(K)]
        else:
            seq = [xs + 0.97 ** k * (x0 - xs + rng.standard_normal(3)) for k in range(K)]
        p = preset_params(preset, 1.0, kappa)
        errs = definition1_probe(p, prob.g, prob.A, seq)
        assert errs[-1] < 1e-8

    def test_needs_quadratic(self):
        g = SmoothFunction(lambda y: 0.5 * float(y @ y), lambda y: y, 1.0, 1.0)
        with pytest.raises(TypeError):
            definition1_probe(gd_params(1, 1), g, np.eye(1), [np.zeros(1)])


class TestModeMatrix:
    def test_gd_reduced(self):
        np.testing.assert_allclose(mode_matrix(gd_params(1, 3), 2.0), [[0.0]])

    def test_matches_step(self, rng):
        # on a scalar quadratic g = lam/2 y^2 with A x = 0 the error state evolves by M(lam)
        lam = 2.5
        p = OracleParams(0.3, 0.2, 0.1, 0.15)
        g = QuadraticFunction(np.array([[lam]]))
        s = OracleState(rng.standard_normal(1), rng.standard_normal(1))
        nxt, _ = oracle_step(p, s, g, np.zeros((1, 1)), np.zeros(1))
        pred = mode_matrix(p, lam) @ np.array([s.xi1[0], s.xi2[0]])
        np.testing.assert_allclose([nxt.xi1[0], nxt.xi2[0]], pred, rtol=1e-14)

    def test_reduced_only_for_gd(self):
        with pytest.raises(ValueError):
            mode_matrix(nesterov_params(1, 4), 1.0, reduced=True)
