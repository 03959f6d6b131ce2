"""Smooth convex functions with strong-convexity / smoothness metadata.

A :class:`SmoothFunction` carries a value, a gradient and its declared
constants ``(mu, beta)``: ``mu``-strong convexity and ``beta``-smoothness.
:class:`QuadraticFunction` additionally exposes its conjugate in closed
form and validates its constants against the Hessian spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .linalg import (
    Matrix,
    NotPositiveDefiniteError,
    Vector,
    as_matrix,
    as_vector,
    cho_solve,
    cholesky,
    is_symmetric,
    symmetric_eigvals,
)

SECTOR_TOL = 1e-12


class SmoothFunction:
    """A convex function in S(mu, beta) given by value and gradient callables.

    The constants are trusted metadata: they are not verified for general
    callables (sample them with :func:`sector_check` if in doubt).
    """

    def __init__(
        self,
        value: Callable[[Vector], float],
        gradient: Callable[[Vector], Vector],
        mu: float,
        beta: float,
        dim: int | None = None,
    ):
        mu = float(mu)
        beta = float(beta)
        if not (0.0 <= mu <= beta):
            raise ValueError(f"need 0 <= mu <= beta, got mu={mu}, beta={beta}")
        self._value = value
        self._gradient = gradient
        self.mu = mu
        self.beta = beta
        self.dim = dim

    def value(self, x: Vector) -> float:
        return float(self._value(np.asarray(x, dtype=np.float64)))

    def gradient(self, x: Vector) -> Vector:
        return np.asarray(self._gradient(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(mu={self.mu:g}, beta={self.beta:g}, dim={self.dim})"


class QuadraticFunction(SmoothFunction):
    """``x -> 0.5 x^T Q x + q^T x + c`` with symmetric ``Q``.

    ``mu`` and ``beta`` default to the extreme Hessian eigenvalues (``mu``
    clipped at 0). Declared values are accepted if they bracket the
    spectrum up to a relative tolerance of 1e-9.
    """

    def __init__(self, Q, q=None, c: float = 0.0, mu: float | None = None,
                 beta: float | None = None):
        Q = as_matrix(Q, "Q")
        if Q.shape[0] != Q.shape[1] or not is_symmetric(Q):
            raise ValueError("Q must be square and symmetric")
        Q = 0.5 * (Q + Q.T)
        n = Q.shape[0]
        q = np.zeros(n) if q is None else as_vector(q, n, "q")
        eig = symmetric_eigvals(Q)
        lo, hi = float(eig[0]), float(eig[-1])
        scale = max(abs(lo), abs(hi), 1.0)
        if lo < -1e-12 * scale:
            raise ValueError(f"Q is not positive semidefinite (min eigenvalue {lo:g})")
        if mu is None:
            mu = max(lo, 0.0)
        elif mu > lo + 1e-9 * scale:
            raise ValueError(f"declared mu={mu} exceeds the smallest Hessian eigenvalue {lo}")
        if beta is None:
            beta = max(hi, 0.0)
        elif beta < hi - 1e-9 * scale:
            raise ValueError(f"declared beta={beta} is below the largest Hessian eigenvalue {hi}")
        Q.setflags(write=False)
        q.setflags(write=False)
        self.Q = Q
        self.q = q
        self.c = float(c)
        self.eigenvalues = eig
        super().__init__(self._quad_value, self._quad_gradient, mu, beta, dim=n)

    @classmethod
    def linear(cls, coef) -> "QuadraticFunction":
        """The linear function ``x -> coef^T x`` (zero Hessian, so beta = 0)."""
        coef = as_vector(coef, name="coef")
        n = coef.shape[0]
        return cls(np.zeros((n, n)), coef, 0.0, mu=0.0, beta=0.0)

    @property
    def is_linear(self) -> bool:
        return not np.any(self.Q)

    def _quad_value(self, x):
        return 0.5 * x @ (self.Q @ x) + self.q @ x + self.c

    def _quad_gradient(self, x):
        return self.Q @ x + self.q

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(self._quad_value(x))

    def gradient(self, x):
        # also accepts a stack of points, one per row
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            return x @ self.Q.T + self.q
        return self.Q @ x + self.q

    @cached_property
    def cholesky_factor(self) -> Matrix:
        try:
            return cholesky(self.Q)
        except NotPositiveDefiniteError:
            raise NotPositiveDefiniteError("Q is singular; the conjugate gradient is undefined") from None

    def conjugate_gradient(self, s) -> Vector:
        """``grad g*(s) = Q^{-1}(s - q)``; ``s`` may be a stack of rows."""
        s = np.asarray(s, dtype=np.float64)
        L = self.cholesky_factor
        if s.ndim == 2:
            return cho_solve(L, (s - self.q).T).T
        return cho_solve(L, s - self.q)

    def conjugate_value(self, s) -> float:
        """``g*(s) = 0.5 (s - q)^T Q^{-1} (s - q) - c``."""
        s = np.asarray(s, dtype=np.float64)
        w = s - self.q
        return float(0.5 * w @ self.conjugate_gradient(s) - self.c)

    def plus_penalty(self, A, b, weight: float) -> "QuadraticFunction":
        """``y -> self(y) + weight/2 * ||A^T y - b||^2`` as a new quadratic."""
        A = as_matrix(A, "A")
        b = as_vector(b, A.shape[1], "b")
        return QuadraticFunction(
            self.Q + weight * (A @ A.T),
            self.q - weight * (A @ b),
            self.c + 0.5 * weight * float(b @ b),
        )


@dataclass(frozen=True)
class SectorPair:
    """A pair ``(u, y)`` tested against the sector constraint."""

    u: Vector
    y: Vector

    def __post_init__(self):
        u = as_vector(self.u, name="u")
        y = as_vector(self.y, name="y")
        if u.shape != y.shape:
            raise ValueError(f"sector pair dimensions differ: {u.shape} vs {y.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)


def sector_form(mu: float, beta: float, u, y) -> float:
    """The sector quadratic form ``-2 mu beta |u|^2 + 2 (mu+beta) u.y - 2 |y|^2``."""
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(-2.0 * mu * beta * (u @ u) + 2.0 * (mu + beta) * (u @ y) - 2.0 * (y @ y))


def sector_check(mu: float, beta: float, pair: SectorPair, tol: float = SECTOR_TOL) -> bool:
    """Whether ``pair`` lies in Sector(mu, beta), up to a relative tolerance."""
    if not (0.0 <= mu <= beta):
        raise ValueError(f"need 0 <= mu <= beta, got mu={mu}, beta={beta}")
    u, y = pair.u, pair.y
    slack = tol * (float(u @ u) + float(y @ y))
    return sector_form(mu, beta, u, y) >= -slack


def conjugate_gradient(g: QuadraticFunction, s) -> Vector:
    """Gradient of the convex conjugate of a strongly convex quadratic."""
    if not isinstance(g, QuadraticFunction):
        raise TypeError("closed-form conjugate gradient needs a QuadraticFunction")
    return g.conjugate_gradient(as_vector(s, g.dim, "s"))


def grad_check(fun: SmoothFunction, x, h: float = 1e-6) -> float:
    """Maximum component error of the gradient against central differences.

    Errors are measured relative to the larger of the two gradients'
    infinity norms, so components near zero do not inflate the result.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_vector(x)
    g = fun.gradient(x)
    fd = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fd[i] = (fun.value(x + e) - fun.value(x - e)) / (2.0 * h)
    scale = max(float(np.max(np.abs(g), initial=0.0)), float(np.max(np.abs(fd), initial=0.0)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(fd - g)) / scale)
