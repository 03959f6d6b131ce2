"""Minimax problems ``min_x max_y f(x) + y^T A x - g(y)`` and their constants."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from .functions import QuadraticFunction, SmoothFunction
from .linalg import (
    Matrix,
    Vector,
    as_matrix,
    as_vector,
    cho_solve,
    singular_extremes,
    solve_spd,
)

RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """``A`` does not have full column rank."""


class ExactOracleUnavailable(TypeError):
    """The exact inner maximiser needs a quadratic ``g``."""


@dataclass(frozen=True)
class ProblemConstants:
    mu_g: float
    beta_g: float
    beta_f: float
    sigma_min: float
    sigma_max: float
    mu_p: float
    beta_p: float
    alpha_p: float
    alpha_g: float
    beta_psi: float

    @property
    def kappa_g(self) -> float:
        return self.beta_g / self.mu_g

    @property
    def kappa_p(self) -> float:
        return self.beta_p / self.mu_p

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SaddlePoint:
    x_star: Vector
    y_star: Vector


@dataclass(frozen=True, eq=False)
class MinimaxProblem:
    """The triple ``(f, g, A)`` with ``A`` of shape ``(m, n)``.

    ``g`` must be strongly convex. Full column rank of ``A`` is checked when
    the constants are derived.
    """

    f: SmoothFunction
    g: SmoothFunction
    A: Matrix
    seed: int | None = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if self.g.mu <= 0:
            raise ValueError("g must be strongly convex (mu_g > 0)")
        m, n = A.shape
        if self.f.dim is not None and self.f.dim != n:
            raise ValueError(f"f acts on R^{self.f.dim} but A has {n} columns")
        if self.g.dim is not None and self.g.dim != m:
            raise ValueError(f"g acts on R^{self.g.dim} but A has {m} rows")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def is_quadratic(self) -> bool:
        return isinstance(self.f, QuadraticFunction) and isinstance(self.g, QuadraticFunction)

    @cached_property
    def constants(self) -> ProblemConstants:
        return derive_constants(self)

    @cached_property
    def saddle(self) -> SaddlePoint:
        return saddle_point(self)

    def residual(self, x, y) -> float:
        """``||grad f(x) + A^T y|| + ||A x - grad g(y)||``."""
        gx = self.f.gradient(x) + self.A.T @ y
        gy = self.A @ x - self.g.gradient(y)
        return float(np.linalg.norm(gx) + np.linalg.norm(gy))


def derive_constants(prob: MinimaxProblem) -> ProblemConstants:
    """Primal and dual constants of the problem (``p`` lies in S(mu_p, beta_p))."""
    s_min, s_max = singular_extremes(prob.A)
    if s_min <= RANK_TOL * max(s_max, 1.0):
        raise RankDeficientError("full column rank required: A has sigma_min "
                                 f"{s_min:.3g}")
    mu_g, beta_g, beta_f = prob.g.mu, prob.g.beta, prob.f.beta
    mu_p = s_min ** 2 / beta_g
    beta_p = s_max ** 2 / mu_g + beta_f
    return ProblemConstants(
        mu_g=mu_g,
        beta_g=beta_g,
        beta_f=beta_f,
        sigma_min=s_min,
        sigma_max=s_max,
        mu_p=mu_p,
        beta_p=beta_p,
        alpha_p=mu_p * beta_p / (mu_p + beta_p),
        alpha_g=mu_g * beta_g / (mu_g + beta_g),
        beta_psi=s_max / mu_g,
    )


def _require_quadratic_g(prob: MinimaxProblem) -> QuadraticFunction:
    if not isinstance(prob.g, QuadraticFunction):
        raise ExactOracleUnavailable("exact oracle unavailable: g is not quadratic")
    return prob.g


def phi(prob: MinimaxProblem, x) -> Vector:
    """The exact inner maximiser ``grad g*(A x)``; rows of a 2-D ``x`` are mapped."""
    g = _require_quadratic_g(prob)
    x = np.asarray(x, dtype=np.float64)
    return g.conjugate_gradient(x @ prob.A.T if x.ndim == 2 else prob.A @ x)


def primal_gradient(prob: MinimaxProblem, x) -> Vector:
    """``grad p(x) = grad f(x) + A^T grad g*(A x)``."""
    x = as_vector(x, prob.n, "x")
    return prob.f.gradient(x) + prob.A.T @ phi(prob, x)


def primal_value(prob: MinimaxProblem, x) -> float:
    """``p(x) = f(x) + g*(A x)``."""
    g = _require_quadratic_g(prob)
    x = as_vector(x, prob.n, "x")
    return prob.f.value(x) + g.conjugate_value(prob.A @ x)


def saddle_point(prob: MinimaxProblem,
                 fallback: Callable[[MinimaxProblem], SaddlePoint] | None = None) -> SaddlePoint:
    """The unique saddle point ``(x*, y*)``.

    For quadratic ``f`` and ``g`` the KKT system is solved through its
    Schur complement ``(Q_f + A^T Q_g^{-1} A) x = A^T Q_g^{-1} q_g - q_f``,
    which is positive definite under full column rank. Other problems need
    ``fallback``.
    """
    if not prob.is_quadratic:
        if fallback is None:
            raise ExactOracleUnavailable("closed-form saddle point needs quadratic f and g")
        return fallback(prob)
    f, g, A = prob.f, prob.g, prob.A
    GinvA = cho_solve(g.cholesky_factor, A)
    S = f.Q + A.T @ GinvA
    S = 0.5 * (S + S.T)
    rhs = A.T @ cho_solve(g.cholesky_factor, g.q) - f.q
    x_star = solve_spd(S, rhs)
    y_star = g.conjugate_gradient(A @ x_star)
    return SaddlePoint(x_star, y_star)


def _orthonormal(rng: np.random.Generator, rows: int, cols: int) -> Matrix:
    Qm, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    # sign fix makes the factor a deterministic function of the draw
    return Qm * np.sign(np.diag(R))


def random_quadratic_instance(n: int, m: int, kappa: float, seed: int,
                              sigma_max: float = 1.0) -> MinimaxProblem:
    """Random problem with linear ``f`` and quadratic ``g`` of condition ``kappa``.

    ``g`` has Hessian eigenvalues log-spaced on ``[1, kappa]`` in a random
    orthonormal basis, so ``mu_g = 1`` and ``beta_g = kappa``. ``A`` has
    orthonormal random singular vectors and singular values log-spaced on
    ``[1, sigma_max]``; ``f(x) = -b^T x`` with Gaussian ``b``.
    """
    if n < 1 or m < n:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    if m == 1 and kappa != 1:
        raise ValueError("a one-dimensional g cannot have condition number != 1")
    if sigma_max < 1:
        raise ValueError("sigma_max must be >= 1")
    rng = np.random.default_rng(seed)
    U = _orthonormal(rng, m, m)
    lam = np.logspace(0.0, math.log10(kappa), m) if m > 1 else np.ones(1)
    lam[0], lam[-1] = 1.0, float(kappa)
    Qg = (U * lam) @ U.T
    Qg = 0.5 * (Qg + Qg.T)
    qg = rng.standard_normal(m)
    Ua = _orthonormal(rng, m, n)
    V = _orthonormal(rng, n, n)
    s = np.logspace(0.0, math.log10(sigma_max), n) if n > 1 else np.ones(1)
    A = (Ua * s) @ V.T
    b = rng.standard_normal(n)
    return MinimaxProblem(
        QuadraticFunction.linear(-b),
        QuadraticFunction(Qg, qg, mu=1.0, beta=float(kappa)),
        A,
        seed=int(seed),
    )


def equality_constrained_builder(g: SmoothFunction, A, b, eta1: float,
                                 penalty: float | None = None) -> MinimaxProblem:
    """Minimax form of ``max_y -g(y) s.t. A^T y = b`` with an augmented penalty.

    Returns the problem with ``f(x) = -b^T x`` and
    ``g~(y) = g(y) + penalty/2 * ||A^T y - b||^2``. The penalty weight
    defaults to the primal step ``eta1``: with that coupling the exact
    primal gradient method on the result is the augmented Lagrangian
    method. A different ``penalty`` still yields the same constrained
    optimum, but the method is then a differently weighted augmented
    Lagrangian.
    """
    if eta1 <= 0:
        raise ValueError("eta1 must be positive")
    w = float(eta1 if penalty is None else penalty)
    if w < 0:
        raise ValueError("penalty must be nonnegative")
    A = as_matrix(A, "A")
    b = as_vector(b, A.shape[1], "b")
    if isinstance(g, QuadraticFunction):
        g_aug = g.plus_penalty(A, b, w)
    else:
        _, s_max = singular_extremes(A)

        def value(y, _g=g):
            r = A.T @ y - b
            return _g.value(y) + 0.5 * w * float(r @ r)

        def gradient(y, _g=g):
            return _g.gradient(y) + w * (A @ (A.T @ y - b))

        g_aug = SmoothFunction(value, gradient, g.mu, g.beta + w * s_max ** 2, dim=A.shape[0])
    return MinimaxProblem(QuadraticFunction.linear(-b), g_aug, A)


# -- serialisation -----------------------------------------------------------

def problem_to_dict(prob: MinimaxProblem) -> dict:
    """JSON-ready document ``{n, m, A, g: {Q, q}, f: {b}, seed}``.

    Floats are written with Python's shortest round-trip repr, so reading
    the document back reproduces every double exactly. Quadratic ``f`` is
    stored as ``f: {Q, q}`` instead of ``f: {b}``.
    """
    if not prob.is_quadratic:
        raise TypeError("only quadratic problems can be serialised")
    f, g = prob.f, prob.g
    doc = {
        "n": prob.n,
        "m": prob.m,
        "A": prob.A.tolist(),
        "g": {"Q": g.Q.tolist(), "q": g.q.tolist(), "mu": g.mu, "beta": g.beta},
    }
    if f.is_linear:
        doc["f"] = {"b": (-f.q).tolist()}
    else:
        doc["f"] = {"Q": f.Q.tolist(), "q": f.q.tolist()}
    doc["seed"] = prob.seed
    return doc


def problem_from_dict(doc: dict) -> MinimaxProblem:
    n, m = int(doc["n"]), int(doc["m"])
    A = np.array(doc["A"], dtype=np.float64).reshape(m, n)
    gd = doc["g"]
    g = QuadraticFunction(np.array(gd["Q"], dtype=np.float64).reshape(m, m),
                          gd.get("q"), gd.get("c", 0.0), mu=gd.get("mu"), beta=gd.get("beta"))
    fd = doc.get("f", {})
    if "Q" in fd:
        f = QuadraticFunction(np.array(fd["Q"], dtype=np.float64).reshape(n, n), fd.get("q"))
    else:
        f = QuadraticFunction.linear(-np.asarray(fd.get("b", np.zeros(n)), dtype=np.float64))
    seed = doc.get("seed")
    return MinimaxProblem(f, g, A, seed=None if seed is None else int(seed))


def save_problem(prob: MinimaxProblem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(prob), indent=1) + "\n", encoding="utf-8")


def load_problem(path) -> MinimaxProblem:
    return problem_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
