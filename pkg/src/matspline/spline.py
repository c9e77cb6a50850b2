"""Piecewise cubic splines with matrix coefficients on a uniform partition."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DimensionError, as_matrix, frobenius_norm


class DomainError(ValueError):
    """Evaluation point outside ``[a, b]``."""


@dataclass(frozen=True)
class Partition:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not float(self.b) > float(self.a):
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def knots(self) -> list[float]:
        h = self.h
        xs = [self.a + k * h for k in range(self.n)]
        xs.append(self.b)  # clamp the last knot
        return xs


def piece_index(partition: Partition, x: float) -> int:
    """Index k of the piece owning `x`.

    Pieces are half-open ``[x_k, x_{k+1})`` except the last, which also owns
    ``b``.
    """
    if not partition.a <= x <= partition.b:
        raise DomainError(f"x={x} outside [{partition.a}, {partition.b}]")
    k = bisect.bisect_right(partition.knots, x) - 1
    return min(max(k, 0), partition.n - 1)


@dataclass(frozen=True)
class CubicPiece:
    """``S(x) = C0 + C1 u + C2 u^2 + C3 u^3`` with ``u = x - x_left``."""

    x_left: float
    C0: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    C3: np.ndarray

    def __post_init__(self):
        coeffs = [as_matrix(c) for c in (self.C0, self.C1, self.C2, self.C3)]
        shapes = {c.shape for c in coeffs}
        if len(shapes) != 1:
            raise DimensionError(f"CubicPiece: coefficient shapes differ: {sorted(shapes)}")
        for name, c in zip(("C0", "C1", "C2", "C3"), coeffs):
            c.setflags(write=False)
            object.__setattr__(self, name, c)
        object.__setattr__(self, "x_left", float(self.x_left))

    @property
    def coeffs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.C0, self.C1, self.C2, self.C3)

    def eval_local(self, u: float, order: int = 0) -> np.ndarray:
        """Value (or derivative of `order` 1, 2) at offset `u`, by Horner's rule."""
        C0, C1, C2, C3 = self.coeffs
        if order == 0:
            return C0 + u * (C1 + u * (C2 + u * C3))
        if order == 1:
            return C1 + u * (2 * C2 + u * (3 * C3))
        if order == 2:
            return 2 * C2 + u * (6 * C3)
        raise ValueError(f"order must be 0, 1 or 2, got {order}")

    def __call__(self, x: float, order: int = 0) -> np.ndarray:
        return self.eval_local(x - self.x_left, order)


@dataclass(frozen=True)
class MatrixCubicSpline:
    partition: Partition
    pieces: tuple[CubicPiece, ...]

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if len(pieces) != self.partition.n:
            raise ValueError(f"expected {self.partition.n} pieces, got {len(pieces)}")
        if len({p.C0.shape for p in pieces}) != 1:
            raise DimensionError("pieces have different coefficient shapes")
        for k, (p, xk) in enumerate(zip(pieces, self.partition.knots)):
            if p.x_left != xk:
                raise ValueError(f"piece {k} starts at {p.x_left}, knot is {xk}")
        object.__setattr__(self, "pieces", pieces)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pieces[0].C0.shape

    def eval(self, x: float, order: int = 0) -> np.ndarray:
        return eval_spline(self, x, order)

    __call__ = eval


def eval_spline(spline: MatrixCubicSpline, x: float, order: int = 0) -> np.ndarray:
    """Evaluate ``S``, ``S'`` or ``S''`` at `x` in ``[a, b]``."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    k = piece_index(spline.partition, x)
    return spline.pieces[k](x, order)


@dataclass(frozen=True)
class KnotJump:
    knot: int
    x: float
    jumps: tuple[float, float, float]  # orders 0, 1, 2


def continuity_report(spline: MatrixCubicSpline) -> list[KnotJump]:
    """Frobenius norm of the jump in ``S, S', S''`` at every interior knot."""
    knots = spline.partition.knots
    report = []
    for k in range(1, spline.partition.n):
        left, right = spline.pieces[k - 1], spline.pieces[k]
        x = knots[k]
        jumps = tuple(
            frobenius_norm(left(x, order) - right.eval_local(0.0, order)) for order in range(3)
        )
        report.append(KnotJump(k, x, jumps))
    return report


def global_coefficients(piece: CubicPiece) -> list[np.ndarray]:
    """Coefficients of the piece in the global monomial basis ``1, x, x^2, x^3``.

    ``sum_j C_j (x - x0)^j`` is expanded binomially; each global coefficient
    is accumulated from the highest local degree down.
    """
    x0 = piece.x_left
    local = piece.coeffs
    binom = ((1,), (1, 1), (1, 2, 1), (1, 3, 3, 1))
    out = []
    for m in range(4):
        acc = np.zeros_like(local[0])
        for j in range(3, m - 1, -1):
            acc = acc + binom[j][m] * (-x0) ** (j - m) * local[j]
        out.append(acc)
    return out


def spline_from_global(partition: Partition, coeffs: Sequence) -> MatrixCubicSpline:
    """Spline whose every piece encodes the same global cubic ``sum c_m x^m``."""
    g = [as_matrix(c) for c in coeffs]
    pieces = []
    for x0 in partition.knots[:-1]:
        # Taylor coefficients p^(j)(x0) / j!
        c0 = g[0] + x0 * (g[1] + x0 * (g[2] + x0 * g[3]))
        c1 = g[1] + x0 * (2 * g[2] + x0 * 3 * g[3])
        c2 = g[2] + 3 * x0 * g[3]
        pieces.append(CubicPiece(x0, c0, c1, c2, g[3]))
    return MatrixCubicSpline(partition, tuple(pieces))
