"""Interval-by-interval construction of the C^2 cubic matrix spline.

On ``[x_k, x_{k+1}]`` the spline is the quadratic Taylor part ``beta_k``
inherited from the previous piece plus ``A_k (x - x_k)^3 / 6``.  The single
unknown ``A_k`` is fixed by asking the spline to satisfy the ODE at
``x_{k+1}``, which gives the fixed-point equation::

    A_k = g(A_k),  g(T) = (f(x_{k+1}, beta_k(x_{k+1}) + T h^3 / 6) - beta_k''(x_{k+1})) / h

``g`` is a contraction with factor ``L h^2 / 6`` whenever ``h < sqrt(6 / L)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import SingularMatrixError, frobenius_norm, identity, solve_linear, zeros
from .problems import LinearConstant, MatrixIVP, Rhs, lipschitz_of
from .spline import CubicPiece, MatrixCubicSpline, Partition

log = logging.getLogger(__name__)


class StepBoundError(ValueError):
    """The step violates ``h < sqrt(6 / L)``."""

    def __init__(self, h: float, bound: float):
        super().__init__(f"step h={h:.6g} is not below sqrt(6/L)={bound:.6g}")
        self.h = h
        self.bound = bound


class NonConvergenceError(ArithmeticError):
    """Fixed-point iteration hit its iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class FixedPointConfig:
    tol: float = 1e-12
    max_iter: int = 100
    warm_start: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class IntervalRecord:
    k: int
    iterations: int
    final_residual: float
    contraction_bound: float


@dataclass
class BuildReport:
    h: float
    lipschitz: float
    records: list[IntervalRecord] = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.records)

    @property
    def max_residual(self) -> float:
        return max((r.final_residual for r in self.records), default=0.0)


@dataclass(frozen=True)
class CoefficientSolution:
    """Result of one ``A_k`` solve.

    `increments` holds ``||T_{m+1} - T_m||_F`` for every fixed-point sweep
    (empty for the direct linear solve).
    """

    A: np.ndarray
    iterations: int
    residual: float
    increments: tuple[float, ...] = ()


def max_step(L: float) -> float:
    """Largest admissible step ``sqrt(6 / L)`` (exclusive); ``inf`` for ``L = 0``."""
    if not L >= 0:
        raise ValueError(f"Lipschitz constant must be non-negative, got {L}")
    if L == 0:
        return math.inf
    return math.sqrt(6.0 / L)


def min_subintervals(a: float, b: float, L: float) -> int:
    """Smallest ``n >= 1`` with ``n > (b - a) sqrt(L / 6)``."""
    if not b > a:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if not L >= 0:
        raise ValueError(f"Lipschitz constant must be non-negative, got {L}")
    limit = (b - a) * math.sqrt(L) / math.sqrt(6.0)
    return max(1, math.floor(limit) + 1)


def advance_beta(prev: CubicPiece, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``S, S', S''`` of `prev` at its right end ``x_left + h``."""
    return prev.eval_local(h, 0), prev.eval_local(h, 1), prev.eval_local(h, 2)


def coefficient_map(rhs: Rhs, x_next: float, beta_next: np.ndarray,
                    beta2_next: np.ndarray, h: float):
    """The map ``g`` whose fixed point is ``A_k``."""
    h3 = h**3 / 6.0

    def g(T: np.ndarray) -> np.ndarray:
        return (rhs(x_next, beta_next + h3 * T) - beta2_next) / h

    return g


def solve_coefficient(rhs: Rhs, x_next: float, beta_next: np.ndarray,
                      beta2_next: np.ndarray, h: float,
                      cfg: Optional[FixedPointConfig] = None,
                      init: Optional[np.ndarray] = None) -> CoefficientSolution:
    """Solve ``A = g(A)`` for the cubic coefficient of one interval.

    Linear right-hand sides ``f = C Y + D(x)`` are solved directly from
    ``(I - h^2 C / 6) A = (C beta + D - beta'') / h``; anything else goes
    through plain fixed-point iteration started at `init`.
    """
    cfg = cfg or FixedPointConfig()
    g = coefficient_map(rhs, x_next, beta_next, beta2_next, h)

    if isinstance(rhs, LinearConstant):
        C = rhs.C
        M = identity(C.shape[0]) - (h * h / 6.0) * C
        rhs_vec = C @ beta_next - beta2_next
        if rhs.D is not None:
            rhs_vec = rhs_vec + rhs.D(x_next)
        try:
            A = solve_linear(M, rhs_vec / h)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"I - (h^2/6) C is singular at h={h:.6g} (||C||_F h^2/6 = "
                f"{frobenius_norm(C) * h * h / 6:.3g}): {exc}"
            ) from None
        return CoefficientSolution(A, 0, frobenius_norm(A - g(A)))

    T = zeros(*beta_next.shape) if init is None else np.array(init, dtype=np.complex128)
    increments = []
    for it in range(1, cfg.max_iter + 1):
        T_next = g(T)
        diff = frobenius_norm(T_next - T)
        increments.append(diff)
        T = T_next
        if diff <= cfg.tol * max(1.0, frobenius_norm(T)):
            return CoefficientSolution(T, it, diff, tuple(increments))
    raise NonConvergenceError(
        f"fixed-point iteration at x={x_next:.6g} did not converge in "
        f"{cfg.max_iter} iterations (last increment {increments[-1]:.3e})",
        residual=increments[-1],
        iterations=cfg.max_iter,
    )


def build(ivp: MatrixIVP, n: int, cfg: Optional[FixedPointConfig] = None,
          check_step: bool = True) -> tuple[MatrixCubicSpline, BuildReport]:
    """Construct the cubic matrix spline on `n` equal subintervals.

    Parameters
    ----------
    ivp : MatrixIVP
    n : int
        Number of subintervals, ``h = (b - a) / n``.
    cfg : FixedPointConfig, optional
    check_step : bool
        Reject ``h >= sqrt(6 / L)``.  Turning this off builds anyway, with
        no guarantee that the fixed-point iteration converges.

    Raises
    ------
    StepBoundError
        If `check_step` and the step is too large.
    NonConvergenceError, SingularMatrixError
        From the per-interval solve.
    """
    cfg = cfg or FixedPointConfig()
    part = Partition(ivp.a, ivp.b, n)
    h = part.h
    if check_step:
        L = lipschitz_of(ivp)
        bound = max_step(L)
        if not h < bound:
            raise StepBoundError(h, bound)
    else:
        try:
            L = lipschitz_of(ivp)
        except ValueError:
            L = math.nan
    q = L * h * h / 6.0
    report = BuildReport(h=h, lipschitz=L)
    knots = part.knots

    # first interval: Taylor data straight from the initial conditions
    c0 = ivp.Y0
    c1 = ivp.Y1
    d2 = ivp.f(ivp.a, ivp.Y0)
    pieces = []
    A_prev = None
    for k in range(n):
        x_next = knots[k + 1]
        hk = x_next - knots[k]
        beta_next = c0 + hk * (c1 + hk * (d2 / 2))
        beta2_next = d2
        init = A_prev if (cfg.warm_start and A_prev is not None) else None
        sol = solve_coefficient(ivp.rhs, x_next, beta_next, beta2_next, hk, cfg, init)
        piece = CubicPiece(knots[k], c0, c1, d2 / 2, sol.A / 6.0)
        pieces.append(piece)
        report.records.append(IntervalRecord(k, sol.iterations, sol.residual, q))
        log.debug("interval %d: %d iterations, residual %.3e", k, sol.iterations, sol.residual)
        c0, c1, d2 = advance_beta(piece, hk)
        A_prev = sol.A

    return MatrixCubicSpline(part, tuple(pieces)), report


def collocation_residuals(spline: MatrixCubicSpline, ivp: MatrixIVP) -> list[float]:
    """``||S''(x_k) - f(x_k, S(x_k))||_F`` at every knot ``k = 0..n``.

    The value at ``x_k`` for ``k >= 1`` is taken from the piece ending there,
    which is where the collocation condition was imposed.
    """
    knots = spline.partition.knots
    out = []
    for k, x in enumerate(knots):
        piece = spline.pieces[k - 1] if k > 0 else spline.pieces[0]
        out.append(frobenius_norm(piece(x, 2) - ivp.f(x, piece(x, 0))))
    return out
