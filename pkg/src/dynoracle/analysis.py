"""Convergence analysis: contraction factors, small-gain tests, step bounds, exact rates.

The step-size bounds are sufficient conditions derived from a small-gain
argument on two coupled error norms: the primal distance ``||x - x*||``
and the oracle error. For quadratic data the composed recursion is linear,
so :func:`joint_spectral_radius` gives its exact asymptotic rate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .functions import QuadraticFunction
from .linalg import (
    Matrix,
    NotPositiveDefiniteError,
    cho_solve,
    cholesky,
    condition_number_spd,
    solve_discrete_lyapunov,
    spectral_radius,
    symmetric_eigvals,
)
from .oracles import EXACT, OracleParams, mode_matrix
from .problems import MinimaxProblem, ProblemConstants
from .solvers import SolverConfig, fit_rate, inexact_gradient_run

CERT_MARGIN = 1e-6
LYAPUNOV_EPS = 1e-9
SEARCH_GRID = 64


class NotCertifiableError(ValueError):
    """No contraction certificate with rate below one was found."""


class SearchError(RuntimeError):
    """Every probed step size diverged."""


# -- building blocks -----------------------------------------------------------

def contraction_factor(mu: float, beta: float, eta: float) -> float:
    """``1 - eta mu beta / (mu + beta)``, the per-step contraction of a gradient step.

    Valid for ``0 < mu <= beta`` and ``0 < eta <= 2/(mu + beta)``.

    >>> contraction_factor(1.0, 3.0, 0.5)
    0.625
    """
    if not (0 < mu <= beta):
        raise ValueError(f"need 0 < mu <= beta, got {mu}, {beta}")
    limit = 2.0 / (mu + beta)
    if not (0 < eta <= limit * (1 + 1e-12)):
        raise ValueError(f"eta must lie in (0, {limit:g}], got {eta}")
    return 1.0 - mu * beta / (mu + beta) * eta


@dataclass(frozen=True)
class GainMatrix:
    """Coefficients of ``s1+ <= g11 s1 + g12 s2`` and ``s2+ <= g21 s1 + g22 s2``."""

    g11: float
    g12: float
    g21: float
    g22: float

    def __post_init__(self):
        for name in ("g11", "g12", "g21", "g22"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    def as_array(self) -> Matrix:
        return np.array([[self.g11, self.g12], [self.g21, self.g22]])


def small_gain_check(G: GainMatrix) -> bool:
    """Strict small-gain test on a 2x2 gain matrix."""
    return (G.g11 < 1.0 and G.g22 < 1.0
            and G.g12 * G.g21 < (1.0 - G.g11) * (1.0 - G.g22))


# -- gradient-descent oracle bound -------------------------------------------

def _check_eta2(c: ProblemConstants, eta2: float):
    limit = 2.0 / (c.mu_g + c.beta_g)
    if not (0 < eta2 <= limit * (1 + 1e-12)):
        raise ValueError(f"eta2 must lie in (0, 2/(mu_g+beta_g)] = (0, {limit:g}], got {eta2}")


def theorem1_eta1_bound(c: ProblemConstants, eta2: float) -> float:
    """Supremum of primal steps with a convergence guarantee for the GD oracle.

    ``min{alpha_p alpha_g eta2 / (sigma_max beta_psi (alpha_p + beta_p)), 2/(mu_p + beta_p)}``;
    the guarantee holds for ``eta1`` strictly below it.
    """
    _check_eta2(c, eta2)
    first = c.alpha_p * c.alpha_g * eta2 / (c.sigma_max * c.beta_psi * (c.alpha_p + c.beta_p))
    return min(first, 2.0 / (c.mu_p + c.beta_p))


def theorem1_gains(c: ProblemConstants, eta1: float, eta2: float) -> GainMatrix:
    """Gains coupling ``||x - x*||`` and ``||e||`` for the GD oracle."""
    _check_eta2(c, eta2)
    rho1 = 1.0 - c.alpha_p * eta1
    rho2 = 1.0 - c.alpha_g * eta2
    return GainMatrix(rho1, eta1 * c.sigma_max, eta1 * c.beta_psi * c.beta_p,
                      rho2 + eta1 * c.beta_psi * c.sigma_max)


# -- general first-order oracles ---------------------------------------------

@dataclass(frozen=True)
class GeneralizedBoundInputs:
    rho2: float
    c_xi: float
    c_phi: float
    alpha_p: float
    beta_p: float
    mu_p: float

    def __post_init__(self):
        if not (0 <= self.rho2 < 1):
            raise ValueError(f"rho2 must lie in [0, 1), got {self.rho2}")
        for name in ("c_xi", "c_phi", "alpha_p", "beta_p", "mu_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def theorem2_eta1_bound(inp: GeneralizedBoundInputs) -> float:
    """Largest primal step for which all three small-gain conditions hold.

    ``min{alpha_p (1-rho2) / (c_xi (alpha_p + c_phi beta_p)), (1-rho2)/c_xi, 2/(mu_p+beta_p)}``.
    """
    first = inp.alpha_p * (1.0 - inp.rho2) / (inp.c_xi * (inp.alpha_p + inp.c_phi * inp.beta_p))
    return min(first, (1.0 - inp.rho2) / inp.c_xi, 2.0 / (inp.mu_p + inp.beta_p))


def theorem2_gains(inp: GeneralizedBoundInputs, eta1: float) -> GainMatrix:
    return GainMatrix(1.0 - inp.alpha_p * eta1, eta1 * inp.c_xi,
                      eta1 * inp.c_phi * inp.beta_p, inp.rho2 + eta1 * inp.c_xi)


# -- certificates for quadratic g ---------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """A norm ``||.||_P`` in which every eigen-mode of the oracle contracts by ``rho2``.

    ``P`` acts on one mode's error state (1x1 for the reduced GD oracle,
    2x2 otherwise); on ``R^m`` the norm is ``P`` tensored with the identity.
    ``rho_modes`` is the largest per-mode spectral radius on the grid, a
    lower bound for ``rho2``.
    """

    P: Matrix
    rho2: float
    eta2: float
    params: OracleParams
    rho_modes: float
    mu_g: float
    beta_g: float
    method: str = "quadratic-mode-sweep"

    @property
    def reduced(self) -> bool:
        return self.P.shape[0] == 1

    def mode_matrix(self, lam: float) -> Matrix:
        return mode_matrix(self.params, lam, reduced=self.reduced)

    def cond_P(self) -> float:
        return condition_number_spd(self.P)

    def as_dict(self) -> dict:
        return {
            "rho2": self.rho2,
            "eta2": self.eta2,
            "P": self.P.tolist(),
            "params": self.params.as_dict(),
            "method": self.method,
            "rho_modes": self.rho_modes,
            "mu_g": self.mu_g,
            "beta_g": self.beta_g,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1)


def induced_p_norm(M: Matrix, P: Matrix) -> float:
    """``max ||M u||_P / ||u||_P`` via the Cholesky factor of ``P``."""
    L = cholesky(P)
    # ||M u||_P / ||u||_P with u = L^{-T} z
    Linv_T = cho_solve(L, L)  # equals L^{-T}
    N = L.T @ M @ Linv_T
    S = N.T @ N
    return math.sqrt(max(float(symmetric_eigvals(0.5 * (S + S.T))[-1]), 0.0))


def _common_p(Ms, lo: float, hi: float, tol: float = 1e-7):
    # bisection on rho: the smallest rho whose LMI margin is negative
    val, p, r = _kernels.lmi_min_margin(Ms, hi)
    if val >= 0:
        return None
    best = (p, r)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        val, p, r = _kernels.lmi_min_margin(Ms, mid)
        if val < 0:
            hi, best = mid, (p, r)
        else:
            lo = mid
    p, r = best
    P = np.array([[p, r], [r, 1.0 - p]])
    # a touch of identity keeps the found P strictly positive definite
    return 0.999 * P + 0.0005 * np.eye(2)


def certify_assumption2_quadratic(params: OracleParams, mu_g: float, beta_g: float,
                                  grid: int = 512) -> Certificate:
    """Find ``P`` and ``rho2 < 1`` with ``||M(lam) u||_P <= rho2 ||u||_P`` for all modes.

    ``M(lam)`` is the oracle's error map on a Hessian eigen-mode ``lam`` of
    a quadratic ``g`` with spectrum in ``[mu_g, beta_g]``. A per-mode
    Lyapunov solution alone does not bound the other modes, so a common
    ``P`` is required. The induced ``P``-norm of ``M(lam)`` is convex in
    ``lam`` (``M`` is affine in it), so the two endpoint modes determine the
    worst case. ``P`` is the better of the Lyapunov solution at the worst
    grid mode and the common ``P`` found by bisection on the rate, and
    ``rho2`` is its exact endpoint norm plus a margin of 1e-6.

    Raises
    ------
    NotCertifiableError
        If no ``P`` gives ``rho2 < 1``.
    """
    if grid < 2:
        raise ValueError("grid must have at least two points")
    if not (0 < mu_g <= beta_g):
        raise ValueError(f"need 0 < mu_g <= beta_g, got {mu_g}, {beta_g}")
    lams = np.geomspace(mu_g, beta_g, grid)
    lams[0], lams[-1] = mu_g, beta_g
    radii = np.array([spectral_radius(mode_matrix(params, lam)) for lam in lams])
    i_star = int(np.argmax(radii))
    rho_modes = float(radii[i_star])
    ends = [mode_matrix(params, mu_g), mode_matrix(params, beta_g)]

    if params.is_gradient_descent:
        P = np.eye(1)
    else:
        candidates = []
        try:
            Pl = solve_discrete_lyapunov(mode_matrix(params, lams[i_star]),
                                         min(rho_modes + CERT_MARGIN, 1.0), LYAPUNOV_EPS * np.eye(2))
            cholesky(Pl)
            candidates.append(Pl / np.trace(Pl))
        except (NotPositiveDefiniteError, np.linalg.LinAlgError, ValueError):
            pass
        Pc = _common_p(ends, rho_modes, 1.0)
        if Pc is not None:
            candidates.append(Pc)
        if not candidates:
            raise NotCertifiableError("not certifiable at these parameters: no contracting norm found")
        P = min(candidates, key=lambda Q: max(induced_p_norm(M, Q) for M in ends))
    rho2 = max(induced_p_norm(M, P) for M in ends) + CERT_MARGIN
    if not rho2 < 1.0:
        raise NotCertifiableError(f"not certifiable at these parameters (rho2 = {rho2:.6g})")
    return Certificate(P, float(rho2), params.eta2, params, rho_modes, float(mu_g), float(beta_g))


def generalized_inputs_from_certificate(cert: Certificate, c: ProblemConstants) -> GeneralizedBoundInputs:
    """Explicit small-gain constants from a certificate.

    ``c_phi = beta_psi ||b||_P`` bounds the state jump caused by a change
    of ``x`` (``b = -(1, 1)``, or ``-1`` for the reduced GD state).
    ``sigma_max ||e||_{P^-1}`` bounds ``||A^T e^k||`` by the state norm,
    with ``e`` the output row of the oracle. The state-norm gain is
    ``rho2 + eta1 c_phi`` times that, so ``c_xi`` is taken as the product
    with ``max(1, c_phi)`` to make both coupled inequalities hold.
    """
    P = cert.P
    if cert.reduced:
        b = np.array([-1.0])
        e = np.array([1.0])
    else:
        b = np.array([-1.0, -1.0])
        c3 = cert.params.c3
        e = np.array([1.0 + c3, -c3])
    c_phi = c.beta_psi * math.sqrt(float(b @ P @ b))
    e_dual = math.sqrt(float(e @ np.linalg.solve(P, e)))
    c_xi = c.sigma_max * e_dual * max(1.0, c_phi)
    return GeneralizedBoundInputs(cert.rho2, c_xi, c_phi, c.alpha_p, c.beta_p, c.mu_p)


# -- exact rates for quadratic problems ---------------------------------------

def _require_quadratic(prob: MinimaxProblem):
    if not (isinstance(prob.f, QuadraticFunction) and isinstance(prob.g, QuadraticFunction)):
        raise TypeError("joint iteration matrix needs quadratic f and g")


def joint_iteration_matrix(prob: MinimaxProblem, eta1: float, oracle,
                           drop_inert: bool = True) -> Matrix:
    """Linear part of one step of the composed recursion on quadratic data.

    The state is ``(x - x*, xi1 - y*, xi2 - y*)``. The inert second oracle
    state of the GD oracle is dropped unless ``drop_inert=False``, leaving
    ``(x - x*, y - y*)``. ``oracle="exact"`` gives the ``n x n`` matrix of
    exact primal gradient descent.
    """
    _require_quadratic(prob)
    A, Qf, Qg = prob.A, prob.f.Q, prob.g.Q
    m, n = A.shape
    In, Im = np.eye(n), np.eye(m)
    if isinstance(oracle, str):
        if oracle != EXACT:
            raise ValueError(f"unknown oracle {oracle!r}")
        H = Qf + A.T @ cho_solve(prob.g.cholesky_factor, A)
        return In - eta1 * H
    c1, c2, c3, eta2 = oracle.c1, oracle.c2, oracle.c3, oracle.eta2
    if drop_inert and oracle.is_gradient_descent:
        return np.block([[In - eta1 * Qf, -eta1 * A.T],
                         [eta2 * A, Im - eta2 * Qg]])
    Z = np.zeros((m, n))
    return np.block([
        [In - eta1 * Qf, -eta1 * (1.0 + c3) * A.T, eta1 * c3 * A.T],
        [eta2 * A, (1.0 + c1) * Im - eta2 * (1.0 + c2) * Qg, -c1 * Im + eta2 * c2 * Qg],
        [Z, Im, np.zeros((m, m))],
    ])


def joint_spectral_radius(prob: MinimaxProblem, eta1: float, oracle) -> float:
    return spectral_radius(joint_iteration_matrix(prob, eta1, oracle))


# -- primal step search -------------------------------------------------------

class SearchResult(NamedTuple):
    eta1: float
    rho: float


def default_search_range(c: ProblemConstants) -> tuple[float, float]:
    """``[1e-3 h, 10 h]`` around ``h = 2/(mu_p + beta_p)``."""
    h = 2.0 / (c.mu_p + c.beta_p)
    return 1e-3 * h, 10.0 * h


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a, b, iters):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _empirical_rate(prob, oracle, cfg, saddle):
    def rate(eta1):
        tr = inexact_gradient_run(prob, eta1, oracle, cfg, saddle=saddle)
        if tr.status == "diverged":
            return math.inf
        seq = tr.dist_x if (saddle is not None or prob.is_quadratic) else tr.residual
        try:
            return fit_rate(seq).rho
        except ValueError:
            # converged too fast to fit: treat the whole run as one geometric decay
            r = tr.residual
            if tr.status == "converged" and r[0] > 0 and len(r) > 1:
                return float((max(r[-1], 1e-300) / r[0]) ** (1.0 / (len(r) - 1)))
            return math.inf
    return rate


def eta1_search(prob: MinimaxProblem, oracle, lo: float, hi: float, iters: int = 40,
                grid: int = SEARCH_GRID, cfg: SolverConfig | None = None,
                saddle=None) -> SearchResult:
    """Primal step in ``[lo, hi]`` minimising the convergence rate.

    For quadratic problems the rate is the exact joint spectral radius;
    otherwise the rate fitted on a solver run (on ``||x - x*||`` when the
    saddle point is given, else on the residual). The rate need not be
    unimodal in ``eta1``, so a ``grid``-point log-spaced scan picks the best
    cell and golden-section search on ``log eta1`` refines inside it.

    Raises
    ------
    SearchError
        If no probed step gives a rate below one.
    """
    if not (0 < lo <= hi):
        raise ValueError(f"need 0 < lo <= hi, got {lo}, {hi}")
    if prob.is_quadratic:
        def rate(eta1):
            r = joint_spectral_radius(prob, eta1, oracle)
            return r if math.isfinite(r) else math.inf
    else:
        rate = _empirical_rate(prob, oracle, cfg or SolverConfig(max_iters=2000), saddle)
    if lo == hi:
        best = SearchResult(float(lo), float(rate(lo)))
    else:
        etas = np.geomspace(lo, hi, grid)
        rhos = [rate(float(e)) for e in etas]
        i = int(np.argmin(rhos))
        best = SearchResult(float(etas[i]), float(rhos[i]))
        a = math.log(etas[max(i - 1, 0)])
        b = math.log(etas[min(i + 1, grid - 1)])
        t, r = _golden_min(lambda s: rate(math.exp(s)), a, b, iters)
        if r < best.rho:
            best = SearchResult(math.exp(t), float(r))
    if not best.rho < 1.0:
        raise SearchError(f"no step size in [{lo:g}, {hi:g}] converges (best rate {best.rho:g})")
    return best
