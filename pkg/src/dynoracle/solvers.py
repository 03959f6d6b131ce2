"""Iteration schemes for the minimax problem and their traces.

Three solvers share one trace format:

* :func:`pdgm_run`, simultaneous gradient descent-ascent;
* :func:`exact_gradient_run`, gradient descent on the primal function with
  the exact inner maximiser;
* :func:`inexact_gradient_run`, the same primal loop fed by a dynamic
  inexact oracle from :mod:`dynoracle.oracles`.

Quadratic problems run in the compiled loops of ``dynoracle._kernels``;
anything else runs through the generic Python loop.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels
from .functions import QuadraticFunction
from .linalg import Vector, as_vector
from .oracles import EXACT, OracleParams, exact_oracle, oracle_init, oracle_output, oracle_step
from .problems import ExactOracleUnavailable, MinimaxProblem, SaddlePoint

DIV_LIMIT = 1e12
RATE_FLOOR = 1e-12
MIN_FIT_POINTS = 20

_STATUS = {
    _kernels.CONVERGED: "converged",
    _kernels.MAX_ITERS: "max_iters",
    _kernels.DIVERGED: "diverged",
}


class StepSizeWarning(UserWarning):
    """A step size lies outside the range with a known guarantee."""


@dataclass(frozen=True)
class SolverConfig:
    """Iteration cap, stopping tolerance and starting point.

    The stopping test is on the saddle residual
    ``||grad f(x) + A^T y|| + ||A x - grad g(y)||``. ``x0`` and ``y0``
    default to zero.
    """

    max_iters: int = 1000
    tol: float = 1e-10
    x0: Vector | None = None
    y0: Vector | None = None

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        object.__setattr__(self, "max_iters", int(self.max_iters))

    def start(self, prob: MinimaxProblem) -> tuple[Vector, Vector]:
        x0 = np.zeros(prob.n) if self.x0 is None else as_vector(self.x0, prob.n, "x0")
        y0 = np.zeros(prob.m) if self.y0 is None else as_vector(self.y0, prob.m, "y0")
        return x0.copy(), y0.copy()


@dataclass(eq=False)
class SolverTrace:
    """Iterates ``x^k, y^k`` and saddle residuals of one run.

    Row ``k`` of ``X`` and ``Y`` is iterate ``k``, starting at the initial
    point. Distances need the saddle point, which is computed on demand for
    quadratic problems or can be supplied. ``err_e`` is
    ``||y^k - grad g*(A x^k)||`` and is NaN when ``g`` is not quadratic.
    """

    X: np.ndarray
    Y: np.ndarray
    residual: np.ndarray
    status: str
    problem: MinimaxProblem = field(repr=False)
    method: str = ""
    saddle: SaddlePoint | None = field(default=None, repr=False)
    exact_errors: bool = False

    def __post_init__(self):
        if not (len(self.X) == len(self.Y) == len(self.residual)):
            raise ValueError("trace arrays have inconsistent lengths")

    def __len__(self) -> int:
        return len(self.residual)

    @property
    def iterations(self) -> int:
        """Number of updates performed (rows minus the initial point)."""
        return len(self.residual) - 1

    def _saddle(self) -> SaddlePoint | None:
        if self.saddle is None and self.problem.is_quadratic:
            self.saddle = self.problem.saddle
        return self.saddle

    @cached_property
    def dist_x(self) -> np.ndarray:
        sp = self._saddle()
        if sp is None:
            return np.full(len(self), np.nan)
        return np.linalg.norm(self.X - sp.x_star, axis=1)

    @cached_property
    def dist_y(self) -> np.ndarray:
        sp = self._saddle()
        if sp is None:
            return np.full(len(self), np.nan)
        return np.linalg.norm(self.Y - sp.y_star, axis=1)

    @cached_property
    def err_e(self) -> np.ndarray:
        if self.exact_errors:
            return np.zeros(len(self))
        g = self.problem.g
        if not isinstance(g, QuadraticFunction):
            return np.full(len(self), np.nan)
        A = self.problem.A
        return np.array([np.linalg.norm(y - exact_oracle(g, A, x)) for x, y in zip(self.X, self.Y)])

    def to_csv(self, path=None) -> str:
        """CSV with header ``iter,dist_x,dist_y,err_e,residual``; writes ``path`` if given."""
        buf = io.StringIO()
        buf.write("iter,dist_x,dist_y,err_e,residual\n")
        for k, row in enumerate(zip(self.dist_x, self.dist_y, self.err_e, self.residual)):
            buf.write(f"{k}," + ",".join(format(float(v), ".17g") for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        return text


@dataclass(frozen=True)
class RateEstimate:
    rho: float
    fit_residual: float
    window: tuple[int, int]


def _quadratic_parts(prob: MinimaxProblem):
    f, g = prob.f, prob.g
    return f.Q, f.q, g.Q, g.q, prob.A


def _check_eta(name, eta):
    if not (eta > 0 and math.isfinite(eta)):
        raise ValueError(f"{name} must be positive and finite, got {eta}")


def _diverged(res, x, y):
    return not math.isfinite(res) or np.linalg.norm(x) + np.linalg.norm(y) > DIV_LIMIT


def _generic_loop(prob: MinimaxProblem, cfg: SolverConfig, x, y_of, advance):
    # y_of(k, x) gives y^k; advance(x, y) returns x^{k+1} and updates any state
    f, g, A = prob.f, prob.g, prob.A
    X, Y, R = [], [], []
    status = "max_iters"
    for k in range(cfg.max_iters + 1):
        y = y_of(x)
        gx = f.gradient(x) + A.T @ y
        gy = A @ x - g.gradient(y)
        res = float(np.linalg.norm(gx) + np.linalg.norm(gy))
        X.append(x)
        Y.append(y)
        R.append(res)
        if res < cfg.tol:
            status = "converged"
            break
        if _diverged(res, x, y):
            status = "diverged"
            break
        if k == cfg.max_iters:
            break
        x = advance(x, y, gx, gy)
    return np.array(X), np.array(Y), np.array(R), status


def pdgm_run(prob: MinimaxProblem, eta1: float, eta2: float, cfg: SolverConfig | None = None,
             saddle: SaddlePoint | None = None) -> SolverTrace:
    """Simultaneous descent on ``x`` and ascent on ``y`` with steps ``eta1, eta2``.

    ``x+ = x - eta1 (grad f(x) + A^T y)``, ``y+ = y + eta2 (A x - grad g(y))``.
    """
    cfg = cfg or SolverConfig()
    _check_eta("eta1", eta1)
    _check_eta("eta2", eta2)
    x0, y0 = cfg.start(prob)
    if prob.is_quadratic:
        X, Y, R, code = _kernels.pdgm_quadratic(
            *_quadratic_parts(prob), float(eta1), float(eta2), x0, y0,
            cfg.max_iters, float(cfg.tol), DIV_LIMIT)
        status = _STATUS[code]
    else:
        state = {"y": y0}

        def y_of(x):
            return state["y"]

        def advance(x, y, gx, gy):
            state["y"] = y + eta2 * gy
            return x - eta1 * gx

        X, Y, R, status = _generic_loop(prob, cfg, x0, y_of, advance)
    return SolverTrace(np.asarray(X), np.asarray(Y), np.asarray(R), status, prob, "pdgm", saddle)


def exact_gradient_run(prob: MinimaxProblem, eta1: float, cfg: SolverConfig | None = None,
                       saddle: SaddlePoint | None = None) -> SolverTrace:
    """Gradient descent on the primal function using the exact inner maximiser.

    ``cfg.y0`` is ignored since ``y^k`` is always ``grad g*(A x^k)``.
    Warns with :class:`StepSizeWarning` above ``2/(mu_p+beta_p)``.
    """
    cfg = cfg or SolverConfig()
    _check_eta("eta1", eta1)
    g = prob.g
    if not isinstance(g, QuadraticFunction):
        raise ExactOracleUnavailable("exact gradient method needs a quadratic g")
    c = prob.constants
    limit = 2.0 / (c.mu_p + c.beta_p)
    if eta1 > limit * (1 + 1e-12):
        warnings.warn(f"eta1={eta1:g} exceeds 2/(mu_p+beta_p)={limit:g}; no contraction guarantee",
                      StepSizeWarning, stacklevel=2)
    x0, _ = cfg.start(prob)
    A = prob.A

    def y_of(x):
        return exact_oracle(g, A, x)

    def advance(x, y, gx, gy):
        return x - eta1 * gx

    X, Y, R, status = _generic_loop(prob, cfg, x0, y_of, advance)
    return SolverTrace(X, Y, R, status, prob, "exact", saddle, exact_errors=True)


def inexact_gradient_run(prob: MinimaxProblem, eta1: float, oracle, cfg: SolverConfig | None = None,
                         saddle: SaddlePoint | None = None) -> SolverTrace:
    """Primal gradient loop whose ``y^k`` comes from a dynamic inexact oracle.

    At step ``k`` the oracle output ``y^k`` drives
    ``x+ = x - eta1 (grad f(x) + A^T y^k)`` and the oracle then consumes
    ``x^k`` (not ``x^{k+1}``), so both updates read the same iterate. With
    the gradient-descent oracle this is exactly :func:`pdgm_run`.
    ``oracle`` is an :class:`OracleParams` or the string ``"exact"``.
    """
    if isinstance(oracle, str):
        if oracle != EXACT:
            raise ValueError(f"oracle must be OracleParams or {EXACT!r}, got {oracle!r}")
        return exact_gradient_run(prob, eta1, cfg, saddle)
    if not isinstance(oracle, OracleParams):
        raise TypeError("oracle must be OracleParams or 'exact'")
    cfg = cfg or SolverConfig()
    _check_eta("eta1", eta1)
    x0, y0 = cfg.start(prob)
    state0 = oracle_init(oracle, y0)
    if prob.is_quadratic:
        X, Y, R, code, _, _ = _kernels.state_space_quadratic(
            *_quadratic_parts(prob), float(eta1), float(oracle.c1), float(oracle.c2),
            float(oracle.c3), float(oracle.eta2), x0, state0.xi1, state0.xi2,
            cfg.max_iters, float(cfg.tol), DIV_LIMIT)
        status = _STATUS[code]
    else:
        box = {"state": state0}

        def y_of(x):
            return oracle_output(oracle, box["state"]).y

        def advance(x, y, gx, gy):
            box["state"], _ = oracle_step(oracle, box["state"], prob.g, prob.A, x)
            return x - eta1 * gx

        X, Y, R, status = _generic_loop(prob, cfg, x0, y_of, advance)
    return SolverTrace(np.asarray(X), np.asarray(Y), np.asarray(R), status, prob,
                       oracle.name, saddle)


def fit_rate(trace, floor: float = RATE_FLOOR, min_points: int = MIN_FIT_POINTS,
             tail: float = 0.5) -> RateEstimate:
    """Exponential rate of ``||x^k - x*||`` by least squares on its logarithm.

    Points at or below ``floor`` are dropped and the fit uses the last
    ``tail`` fraction of the remaining ones. ``trace`` may also be a plain
    sequence of distances. Raises ``ValueError`` when fewer than
    ``min_points`` usable points remain.

    Examples
    --------
    >>> round(fit_rate(0.9 ** np.arange(100)).rho, 9)
    0.9
    """
    d = np.asarray(trace.dist_x if isinstance(trace, SolverTrace) else trace, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        idx = np.nonzero(np.isfinite(d) & (d > floor))[0]
    if len(idx) < min_points:
        raise ValueError(f"too few usable points for a rate fit ({len(idx)} < {min_points})")
    w = idx[int(len(idx) * (1.0 - tail)):]
    if len(w) < 2:
        w = idx[-2:]
    logs = np.log(d[w])
    slope, intercept = np.polyfit(w.astype(np.float64), logs, 1)
    fitted = slope * w + intercept
    rms = float(np.sqrt(np.mean((logs - fitted) ** 2)))
    return RateEstimate(float(math.exp(slope)), rms, (int(w[0]), int(w[-1])))
