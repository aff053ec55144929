"""Extragradient solvers for variational inequalities with Frank-Wolfe inexact projections."""

from .core import (
    DimensionMismatch,
    FeasibleSet,
    ProjectionCertificate,
    VectorField,
    check_certificate,
    dot,
    natural_residual,
    norm,
    pnorm,
)
from .extragradient import (
    EInexPMConfig,
    FWBudgetError,
    InvariantViolation,
    IterationRecord,
    LineSearchError,
    LSConfig,
    SolveTrace,
    VanishingOperatorError,
    armijo_search,
    einexpm_solve,
    einexpm_step,
    einexpmls_solve,
    einexpmls_step,
    gamma_schedule,
    halfspace_stepsize,
)
from .fw import FWConfig, FWResult, fw_project, fw_step, lo_gap
from .problems import (
    BenchmarkProblem,
    Box,
    OperatorDomainError,
    PNormBall,
    get_problem,
    linear_saddle_operator,
    nonlipschitz_operator,
    pnorm_ball_lo,
    th_operator,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkProblem",
    "Box",
    "DimensionMismatch",
    "EInexPMConfig",
    "FWBudgetError",
    "FWConfig",
    "FWResult",
    "FeasibleSet",
    "InvariantViolation",
    "IterationRecord",
    "LineSearchError",
    "LSConfig",
    "OperatorDomainError",
    "PNormBall",
    "ProjectionCertificate",
    "SolveTrace",
    "VanishingOperatorError",
    "VectorField",
    "armijo_search",
    "check_certificate",
    "dot",
    "einexpm_solve",
    "einexpm_step",
    "einexpmls_solve",
    "einexpmls_step",
    "fw_project",
    "fw_step",
    "gamma_schedule",
    "get_problem",
    "halfspace_stepsize",
    "linear_saddle_operator",
    "lo_gap",
    "natural_residual",
    "nonlipschitz_operator",
    "norm",
    "pnorm",
    "pnorm_ball_lo",
    "th_operator",
]
