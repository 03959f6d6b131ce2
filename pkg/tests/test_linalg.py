import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dynoracle.linalg import (
    NotPositiveDefiniteError,
    cholesky,
    eig2x2,
    matvec,
    p_norm,
    singular_extremes,
    solve_discrete_lyapunov,
    solve_spd,
    spectral_radius,
    symmetric_eigvals,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


class TestMatvec:
    def test_identity(self):
        np.testing.assert_array_equal(matvec(np.eye(2), [3, 4]), [3, 4])

    def test_scaling(self):
        np.testing.assert_array_equal(matvec(2 * np.eye(2), [1, 2]), [2, 4])

    def test_hand_product(self):
        np.testing.assert_array_equal(matvec([[1, -0.5], [0.5, 0.5]], [1, 0]), [1, 0.5])

    def test_mismatch(self):
        with pytest.raises(ValueError):
            matvec(np.eye(2), [1, 2, 3])


class TestSpectralRadius:
    def test_identity(self):
        assert spectral_radius(np.eye(2)) == 1.0

    def test_complex_pair(self):
        # eigenvalues 0.75 +- i sqrt(0.1875); modulus sqrt(det)
        assert spectral_radius([[1, -0.5], [0.5, 0.5]]) == pytest.approx(math.sqrt(0.75), abs=1e-14)

    def test_diagonal(self):
        assert spectral_radius(np.diag([0.3, 0.9])) == pytest.approx(0.9)

    def test_rotation_block_in_3x3(self):
        th = 0.7
        M = np.zeros((3, 3))
        M[:2, :2] = 0.8 * np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        M[2, 2] = -0.5
        assert spectral_radius(M) == pytest.approx(0.8, rel=1e-12)

    def test_non_square(self):
        with pytest.raises(ValueError):
            spectral_radius(np.ones((2, 3)))

    @given(arrays(np.float64, (2, 2), elements=finite))
    def test_2x2_matches_explicit_roots(self, M):
        tr = M[0, 0] + M[1, 1]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        root = cmath.sqrt(tr * tr / 4 - det)
        expected = max(abs(tr / 2 + root), abs(tr / 2 - root))
        assert spectral_radius(M) == pytest.approx(expected, rel=1e-8, abs=1e-8)

    def test_eig2x2_product_and_sum(self):
        a, b = eig2x2([[2.0, 1.0], [1.0, 3.0]])
        assert (a + b).real == pytest.approx(5.0)
        assert (a * b).real == pytest.approx(5.0)


class TestSingularExtremes:
    def test_diag(self):
        assert singular_extremes(np.diag([3.0, 1.0])) == pytest.approx((1.0, 3.0))

    def test_identity(self):
        assert singular_extremes(np.eye(3)) == pytest.approx((1.0, 1.0))

    def test_antidiagonal(self):
        assert singular_extremes([[0, 2], [2, 0]]) == pytest.approx((2.0, 2.0))

    def test_bounds_on_random_vectors(self, rng):
        A = rng.standard_normal((7, 4))
        lo, hi = singular_extremes(A)
        for _ in range(200):
            x = rng.standard_normal(4)
            nx, nAx = np.linalg.norm(x), np.linalg.norm(A @ x)
            assert lo * nx <= nAx * (1 + 1e-12)
            assert nAx <= hi * nx * (1 + 1e-12)


def test_symmetric_eigvals_against_lapack(backend, rng):
    B = rng.standard_normal((15, 15))
    S = B + B.T
    np.testing.assert_allclose(symmetric_eigvals(S), np.linalg.eigvalsh(S), rtol=1e-10, atol=1e-10)


def test_symmetric_eigvals_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_eigvals([[1.0, 2.0], [0.0, 1.0]])


class TestCholesky:
    def test_identity(self, backend):
        np.testing.assert_array_equal(cholesky(np.eye(2)), np.eye(2))

    def test_diag(self, backend):
        np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_indefinite(self, backend):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.diag([1.0, -1.0]))

    def test_asymmetric(self):
        with pytest.raises(ValueError):
            cholesky([[1.0, 1.0], [0.0, 1.0]])


class TestSolveSpd:
    def test_identity(self):
        np.testing.assert_allclose(solve_spd(np.eye(2), [1, 2]), [1, 2])

    def test_scaled(self):
        np.testing.assert_allclose(solve_spd(2 * np.eye(2), [2, 4]), [1, 2])

    def test_coupled(self):
        np.testing.assert_allclose(solve_spd([[2, 1], [1, 2]], [3, 3]), [1, 1])

    def test_non_spd(self):
        with pytest.raises(NotPositiveDefiniteError):
            solve_spd([[1, 2], [2, 1]], [1, 1])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_roundtrip(self, n, seed):
        r = np.random.default_rng(seed)
        B = r.standard_normal((n, n))
        P = B @ B.T + 0.5 * np.eye(n)
        x = r.standard_normal(n)
        back = solve_spd(P, matvec(P, x))
        assert np.linalg.norm(back - x) <= 1e-10 * max(np.linalg.norm(x), 1.0) * np.linalg.cond(P) / 10


def test_lyapunov_residual():
    M = np.array([[0.5, 0.2], [-0.1, 0.3]])
    W = np.eye(2)
    P = solve_discrete_lyapunov(M, 0.9, W)
    np.testing.assert_allclose(M.T @ P @ M - 0.81 * P, -W, atol=1e-12)


def test_p_norm():
    assert p_norm([1.0, 2.0], np.diag([4.0, 1.0])) == pytest.approx(math.sqrt(8.0))
