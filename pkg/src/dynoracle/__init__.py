"""Gradient methods for smooth convex-concave minimax problems with warm-started inner oracles."""
from ._kernels import BACKEND
from .analysis import (
    Certificate,
    GainMatrix,
    GeneralizedBoundInputs,
    NotCertifiableError,
    SearchError,
    certify_assumption2_quadratic,
    contraction_factor,
    eta1_search,
    generalized_inputs_from_certificate,
    joint_iteration_matrix,
    joint_spectral_radius,
    small_gain_check,
    theorem1_eta1_bound,
    theorem1_gains,
    theorem2_eta1_bound,
    theorem2_gains,
)
from .functions import QuadraticFunction, SectorPair, SmoothFunction, grad_check, sector_check
from .oracles import (
    OracleParams,
    OracleState,
    OracleStep,
    definition1_probe,
    exact_oracle,
    gd_params,
    heavy_ball_params,
    nesterov_params,
    oracle_init,
    oracle_step,
)
from .problems import (
    MinimaxProblem,
    ProblemConstants,
    SaddlePoint,
    derive_constants,
    equality_constrained_builder,
    primal_gradient,
    random_quadratic_instance,
    saddle_point,
)
from .solvers import (
    RateEstimate,
    SolverConfig,
    SolverTrace,
    exact_gradient_run,
    fit_rate,
    inexact_gradient_run,
    pdgm_run,
)

__version__ = "0.1.0"
