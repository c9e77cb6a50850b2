"""Cubic matrix splines for second-order matrix initial value problems."""

from .builder import (
    BuildReport,
    FixedPointConfig,
    NonConvergenceError,
    StepBoundError,
    advance_beta,
    build,
    max_step,
    min_subintervals,
    solve_coefficient,
)
from .linalg import frobenius_norm, mat_cos, mat_sin, solve_linear
from .problems import (
    GeneralFunction,
    LinearConstant,
    MatrixIVP,
    Oracle,
    builtin_problem,
    lipschitz_of,
    load_problem,
)
from .spline import CubicPiece, MatrixCubicSpline, Partition, continuity_report, eval_spline
from .verify import compare_to_paper_table, convergence_order, error_table

__all__ = [
    "BuildReport", "CubicPiece", "FixedPointConfig", "GeneralFunction", "LinearConstant",
    "MatrixCubicSpline", "MatrixIVP", "NonConvergenceError", "Oracle", "Partition",
    "StepBoundError", "advance_beta", "build", "builtin_problem", "compare_to_paper_table",
    "continuity_report", "convergence_order", "error_table", "eval_spline", "frobenius_norm",
    "lipschitz_of", "load_problem", "mat_cos", "mat_sin", "max_step", "min_subintervals",
    "solve_coefficient", "solve_linear",
]
