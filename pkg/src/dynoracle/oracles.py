"""Dynamic inexact oracles for the inner maximisation ``y = grad g*(A x)``.

All inexact oracles share the two-state first-order form::

    xi1+ = (1 + c1) xi1 - c1 xi2 - eta2 (grad g(v) - A x)
    xi2+ = xi1
    v    = (1 + c2) xi1 - c2 xi2      (gradient query point)
    y    = (1 + c3) xi1 - c3 xi2      (oracle output)

``c1 = c2 = c3 = 0`` is warm-started gradient descent (``xi2`` is inert),
``c1 = c2 = gamma, c3 = 0`` is Nesterov's method and ``c2 = c3 = 0`` is the
heavy-ball method. The oracle is warm started: its state carries over from
one outer iteration to the next.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functions import QuadraticFunction, SmoothFunction
from .linalg import Matrix, Vector, as_vector

PRESETS = ("gd", "nesterov", "heavy-ball", "exact")
EXACT = "exact"
NESTEROV_MAX_KAPPA = 10.0


class NesterovAdmissibilityWarning(UserWarning):
    """The Nesterov preset is used beyond its configured condition-number gate."""


@dataclass(frozen=True)
class OracleParams:
    c1: float
    c2: float
    c3: float
    eta2: float
    name: str = "custom"

    def __post_init__(self):
        if not self.eta2 > 0:
            raise ValueError(f"eta2 must be positive, got {self.eta2}")

    @property
    def is_gradient_descent(self) -> bool:
        return self.c1 == 0.0 and self.c2 == 0.0 and self.c3 == 0.0

    def as_dict(self) -> dict:
        return {"name": self.name, "c1": self.c1, "c2": self.c2, "c3": self.c3, "eta2": self.eta2}


@dataclass(frozen=True)
class OracleState:
    xi1: Vector
    xi2: Vector

    def __post_init__(self):
        if self.xi1.shape != self.xi2.shape:
            raise ValueError("oracle state components must have the same dimension")


@dataclass(frozen=True)
class OracleStep:
    y: Vector
    v: Vector


def _check_constants(mu_g, beta_g):
    if not (0 < mu_g <= beta_g):
        raise ValueError(f"need 0 < mu_g <= beta_g, got {mu_g}, {beta_g}")


def gd_params(mu_g: float, beta_g: float, eta2: float | None = None) -> OracleParams:
    """Gradient-descent oracle; ``eta2`` defaults to the largest admissible ``2/(mu_g+beta_g)``."""
    _check_constants(mu_g, beta_g)
    return OracleParams(0.0, 0.0, 0.0, 2.0 / (mu_g + beta_g) if eta2 is None else float(eta2), "gd")


def nesterov_params(mu_g: float, beta_g: float, eta2: float | None = None,
                    max_kappa: float | None = NESTEROV_MAX_KAPPA) -> OracleParams:
    """Nesterov oracle with ``gamma = (sqrt(beta)-sqrt(mu))/(sqrt(beta)+sqrt(mu))``, ``eta2 = 1/beta``.

    Convergence of the composed method is only known for small enough
    ``beta_g/mu_g``. A :class:`NesterovAdmissibilityWarning` is issued
    above ``max_kappa`` (pass ``None`` to disable the gate). The gate is a
    configurable caution, not a proven threshold.
    """
    _check_constants(mu_g, beta_g)
    if max_kappa is not None and beta_g / mu_g > max_kappa:
        warnings.warn(
            f"Nesterov oracle at condition number {beta_g / mu_g:g} > {max_kappa:g}: "
            "no convergence guarantee", NesterovAdmissibilityWarning, stacklevel=2)
    sb, sm = math.sqrt(beta_g), math.sqrt(mu_g)
    gamma = (sb - sm) / (sb + sm)
    return OracleParams(gamma, gamma, 0.0, 1.0 / beta_g if eta2 is None else float(eta2), "nesterov")


def heavy_ball_params(c1: float, eta2: float) -> OracleParams:
    """Heavy-ball oracle (momentum on the state only). No guarantee is claimed."""
    return OracleParams(float(c1), 0.0, 0.0, float(eta2), "heavy-ball")


def polyak_heavy_ball(mu_g: float, beta_g: float) -> OracleParams:
    """Heavy-ball with Polyak's quadratic tuning, used as the CLI default."""
    _check_constants(mu_g, beta_g)
    sb, sm = math.sqrt(beta_g), math.sqrt(mu_g)
    return heavy_ball_params(((sb - sm) / (sb + sm)) ** 2, 4.0 / (sb + sm) ** 2)


def preset_params(name: str, mu_g: float, beta_g: float, eta2: float | None = None,
                  max_kappa: float | None = NESTEROV_MAX_KAPPA):
    """Resolve a preset name; ``"exact"`` returns the :data:`EXACT` marker."""
    if name == "gd":
        return gd_params(mu_g, beta_g, eta2)
    if name == "nesterov":
        return nesterov_params(mu_g, beta_g, eta2, max_kappa=max_kappa)
    if name == "heavy-ball":
        p = polyak_heavy_ball(mu_g, beta_g)
        return p if eta2 is None else heavy_ball_params(p.c1, eta2)
    if name == EXACT:
        return EXACT
    raise ValueError(f"unknown oracle preset {name!r}; choose from {', '.join(PRESETS)}")


def oracle_init(params: OracleParams, y0) -> OracleState:
    """State with ``xi1 = xi2 = y0`` so the first output and query point are ``y0``."""
    y0 = as_vector(y0, name="y0")
    return OracleState(y0.copy(), y0.copy())


def oracle_output(params: OracleParams, state: OracleState) -> OracleStep:
    xi1, xi2 = state.xi1, state.xi2
    y = (1.0 + params.c3) * xi1 - params.c3 * xi2
    v = (1.0 + params.c2) * xi1 - params.c2 * xi2
    return OracleStep(y, v)


def oracle_step(params: OracleParams, state: OracleState, g: SmoothFunction, A: Matrix,
                x) -> tuple[OracleState, OracleStep]:
    """Advance the oracle one step with input ``x``.

    Returns the next state and the output record of the state consumed.
    """
    out = oracle_output(params, state)
    gv = g.gradient(out.v) - A @ x
    xi1 = (1.0 + params.c1) * state.xi1 - params.c1 * state.xi2 - params.eta2 * gv
    return OracleState(xi1, state.xi1), out


def exact_oracle(g: QuadraticFunction, A: Matrix, x) -> Vector:
    """``grad g*(A x)``: the exact inner maximiser."""
    if not isinstance(g, QuadraticFunction):
        raise TypeError("the exact oracle needs a quadratic g")
    return g.conjugate_gradient(np.asarray(A) @ np.asarray(x, dtype=np.float64))


def definition1_probe(params: OracleParams, g: QuadraticFunction, A: Matrix,
                      x_seq: Sequence, y0=None) -> np.ndarray:
    """Drive the oracle along ``x_seq`` and return ``||y^k - grad g*(A x^k)||``."""
    if not isinstance(g, QuadraticFunction):
        raise TypeError("definition1_probe needs a quadratic g for the exact comparison")
    A = np.asarray(A, dtype=np.float64)
    state = oracle_init(params, np.zeros(A.shape[0]) if y0 is None else y0)
    errs = np.empty(len(x_seq))
    for k, x in enumerate(x_seq):
        state, out = oracle_step(params, state, g, A, x)
        errs[k] = np.linalg.norm(out.y - exact_oracle(g, A, x))
    return errs


def mode_matrix(params: OracleParams, lam: float, reduced: bool | None = None) -> np.ndarray:
    """Oracle state map on one Hessian eigen-mode ``lam`` of a quadratic ``g``.

    On that mode ``grad g(v) - A x`` equals ``lam`` times the query error,
    so the error state evolves by a fixed 2x2 matrix. The gradient-descent
    oracle has an inert second state and is reduced to the 1x1 map
    ``1 - eta2 lam`` unless ``reduced=False``.
    """
    if reduced is None:
        reduced = params.is_gradient_descent
    if reduced:
        if not params.is_gradient_descent:
            raise ValueError("only the gradient-descent oracle has a reduced mode matrix")
        return np.array([[1.0 - params.eta2 * lam]])
    c1, c2, eta2 = params.c1, params.c2, params.eta2
    return np.array([[1.0 + c1 - eta2 * lam * (1.0 + c2), -c1 + eta2 * lam * c2],
                     [1.0, 0.0]])
