"""Stabilized sequential quadratic SDP solver for nonlinear semidefinite programs."""

from .control import ControlParams, ControlState, StepTag
from .corpus import problem_degenerate, problem_no_kkt, problem_random_smooth
from .driver import Iterate, SolveReport, SolverOptions, SolveStatus, TraceRow, solve
from .exceptions import (
    ConfigurationError,
    DimensionError,
    EigenError,
    LineSearchError,
    SolveAborted,
    SubproblemError,
)
from .merit import MeritParams, feasibility_P, feasibility_P_grad, merit_grad, merit_value
from .model import (
    DerivativeCheck,
    HessianPolicy,
    MultiplierPair,
    NsdpProblem,
    apply_A,
    apply_A_adjoint,
    check_derivatives,
    hessian_or_approx,
    lagrangian_grad,
)
from .subqp import (
    SubproblemData,
    SubproblemSolution,
    build_subproblem_data,
    descent_check,
    descent_check_projected,
    reduced_objective,
    solve_subproblem,
)

__version__ = "0.1.0"

__all__ = [
    "ControlParams",
    "ControlState",
    "StepTag",
    "problem_degenerate",
    "problem_no_kkt",
    "problem_random_smooth",
    "Iterate",
    "SolveReport",
    "SolverOptions",
    "SolveStatus",
    "TraceRow",
    "solve",
    "ConfigurationError",
    "DimensionError",
    "EigenError",
    "LineSearchError",
    "SolveAborted",
    "SubproblemError",
    "MeritParams",
    "feasibility_P",
    "feasibility_P_grad",
    "merit_grad",
    "merit_value",
    "DerivativeCheck",
    "HessianPolicy",
    "MultiplierPair",
    "NsdpProblem",
    "apply_A",
    "apply_A_adjoint",
    "check_derivatives",
    "hessian_or_approx",
    "lagrangian_grad",
    "SubproblemData",
    "SubproblemSolution",
    "build_subproblem_data",
    "descent_check",
    "descent_check_projected",
    "reduced_objective",
    "solve_subproblem",
    "__version__",
]
