"""Dense linear algebra used throughout the package.

Vectors and matrices are plain float64 numpy arrays. Symmetric eigenvalues
come from cyclic Jacobi and factorisations from the package's own Cholesky
(both in ``dynoracle._kernels``); the spectral radius of general square
matrices uses closed forms up to 2x2 and LAPACK beyond.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from . import _kernels

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]

JACOBI_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Raised when a symmetric matrix has a non-positive Cholesky pivot."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine exceeds its iteration cap."""


def as_vector(v: ArrayLike, dim: int | None = None, name: str = "vector") -> Vector:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_matrix(M: ArrayLike, name: str = "matrix") -> Matrix:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def matvec(M: ArrayLike, v: ArrayLike) -> Vector:
    """Dense product ``M @ v``; raises ``ValueError`` on a dimension mismatch."""
    M = as_matrix(M)
    v = as_vector(v)
    if M.shape[1] != v.shape[0]:
        raise ValueError(f"cannot multiply {M.shape} matrix by {v.shape[0]}-vector")
    return M @ v


def is_symmetric(M: Matrix, rtol: float = 1e-12) -> bool:
    scale = max(float(np.max(np.abs(M))), 1.0) if M.size else 1.0
    return M.shape[0] == M.shape[1] and bool(np.all(np.abs(M - M.T) <= rtol * scale))


def symmetric_eigvals(S: ArrayLike, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> Vector:
    """Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).

    Iterates until the off-diagonal Frobenius mass is at most
    ``tol * ||S||_F``.
    """
    S = as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not is_symmetric(S):
        raise ValueError("matrix is not symmetric")
    S = 0.5 * (S + S.T)
    vals, sweeps = _kernels.jacobi_eigvalsh(S, tol, max_sweeps)
    if vals is None:
        raise ConvergenceError(f"Jacobi did not converge in {sweeps} sweeps")
    return vals


def eig2x2(M: ArrayLike) -> tuple[complex, complex]:
    """Both eigenvalues of a 2x2 matrix from the characteristic polynomial."""
    M = np.asarray(M, dtype=np.float64)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    half = 0.5 * tr
    disc = half * half - det
    if disc >= 0.0:
        root = math.sqrt(disc)
        # avoid cancellation in the smaller root
        big = half + math.copysign(root, half) if half != 0.0 else root
        small = det / big if big != 0.0 else half - root
        return complex(big), complex(small)
    root = cmath.sqrt(disc)
    return half + root, half - root


def spectral_radius(M: ArrayLike, tol: float = 1e-12) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Complex eigenvalues are handled exactly: sizes up to 2x2 use the
    characteristic polynomial, larger matrices the Hessenberg-QR eigenvalue
    routine in LAPACK. ``tol`` is kept for API compatibility; both paths are
    direct and accurate to rounding.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return 0.0
    if n == 1:
        return abs(float(M[0, 0]))
    if n == 2:
        a, b = eig2x2(M)
        return max(abs(a), abs(b))
    try:
        vals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:  # QR iteration cap hit
        raise ConvergenceError(str(exc)) from exc
    return float(np.max(np.abs(vals)))


def singular_extremes(A: ArrayLike) -> tuple[float, float]:
    """Smallest and largest singular values of ``A`` from Jacobi on ``A^T A``."""
    A = as_matrix(A)
    if A.size == 0:
        raise ValueError("empty matrix")
    G = A.T @ A
    vals = symmetric_eigvals(0.5 * (G + G.T))
    vals = np.clip(vals, 0.0, None)
    return math.sqrt(vals[0]), math.sqrt(vals[-1])


def cholesky(P: ArrayLike) -> Matrix:
    """Lower-triangular ``L`` with ``L @ L.T == P``.

    Raises
    ------
    NotPositiveDefiniteError
        If ``P`` is symmetric but not positive definite. This is the
        package's test for ``P > 0``.
    ValueError
        If ``P`` is not square and symmetric.
    """
    P = as_matrix(P)
    if P.shape[0] != P.shape[1] or not is_symmetric(P):
        raise ValueError("cholesky needs a square symmetric matrix")
    L, ok = _kernels.cholesky_lower(0.5 * (P + P.T))
    if not ok:
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return L


def cho_solve(L: Matrix, b: ArrayLike) -> NDArray[np.float64]:
    """Solve ``L L^T x = b`` given the lower factor; ``b`` may hold columns."""
    z = solve_triangular(L, b, lower=True, check_finite=False)
    return solve_triangular(L.T, z, lower=False, check_finite=False)


def solve_spd(P: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Solve ``P x = b`` for symmetric positive definite ``P`` via Cholesky."""
    L = cholesky(P)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != L.shape[0]:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {L.shape[0]}")
    return cho_solve(L, b)


def p_norm(x: ArrayLike, P: ArrayLike) -> float:
    """``sqrt(x^T P x)``."""
    x = np.asarray(x, dtype=np.float64)
    return math.sqrt(max(float(x @ np.asarray(P) @ x), 0.0))


def condition_number_spd(P: ArrayLike) -> float:
    vals = symmetric_eigvals(P)
    if vals[0] <= 0.0:
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return float(vals[-1] / vals[0])


def solve_discrete_lyapunov(M: ArrayLike, rho: float, W: ArrayLike) -> Matrix:
    """Solve ``M^T P M - rho^2 P = -W`` by vectorising into a Kronecker system.

    Intended for the tiny (2x2) matrices of per-mode oracle analysis.
    """
    M = as_matrix(M)
    W = as_matrix(W)
    k = M.shape[0]
    # vec(M^T P M) = kron(M^T, M^T) vec(P) for column-major vec
    K = np.kron(M.T, M.T) - rho ** 2 * np.eye(k * k)
    vecP = np.linalg.solve(K, -W.reshape(-1, order="F"))
    P = vecP.reshape(k, k, order="F")
    return 0.5 * (P + P.T)
