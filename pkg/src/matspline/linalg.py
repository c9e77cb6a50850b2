"""Dense complex matrix helpers.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``.  The helpers
here add the shape checking, the Frobenius norm used throughout the package,
a small partial-pivot solver and truncated Taylor series for the matrix sine
and cosine.
"""

from __future__ import annotations

import math
from numbers import Number
from typing import Any

import numpy as np

MAX_SERIES_TERMS = 200
SERIES_TOL = 1e-15
PIVOT_RTOL = 1e-14
CANCELLATION_LIMIT = 1e8  # peak term / result ratio beyond which the sum is noise


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ArithmeticError):
    """A linear system is singular to working precision."""


class SeriesConvergenceError(ArithmeticError):
    """A truncated power series did not reach its tolerance."""


def as_matrix(obj: Any) -> np.ndarray:
    """Return `obj` as a finite 2-D complex array (always a fresh copy)."""
    m = np.array(obj, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def _same_shape(A: np.ndarray, B: np.ndarray, op: str) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"{op}: shape mismatch {A.shape} vs {B.shape}")


def add(A, B) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    _same_shape(A, B, "add")
    return A + B


def sub(A, B) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    _same_shape(A, B, "sub")
    return A - B


def scale(A, c: complex) -> np.ndarray:
    return as_matrix(A) * complex(c)


def matmul(A, B) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"matmul: shape mismatch {A.shape} @ {B.shape}")
    return A @ B


def frobenius_norm(A) -> float:
    """Square root of the sum of squared entry moduli."""
    mod = np.abs(np.asarray(A, dtype=np.complex128))
    top = float(mod.max(initial=0.0))
    if top == 0.0 or not math.isfinite(top):
        return top
    return top * math.sqrt(float(np.sum((mod / top) ** 2)))


def solve_linear(M, B) -> np.ndarray:
    """Solve ``M X = B`` by Gaussian elimination with partial pivoting.

    Parameters
    ----------
    M : array-like, shape (r, r)
    B : array-like, shape (r, q)

    Raises
    ------
    DimensionError
        If `M` is not square or the row counts disagree.
    SingularMatrixError
        If a pivot falls below ``1e-14 * ||M||_F``.
    """
    M, B = as_matrix(M), as_matrix(B)
    r = M.shape[0]
    if M.shape[1] != r:
        raise DimensionError(f"solve_linear: matrix {M.shape} is not square")
    if B.shape[0] != r:
        raise DimensionError(f"solve_linear: shape mismatch {M.shape} vs {B.shape}")

    threshold = PIVOT_RTOL * frobenius_norm(M)
    U = M.copy()
    X = B.copy()
    for col in range(r):
        p = col + int(np.argmax(np.abs(U[col:, col])))
        if abs(U[p, col]) <= threshold or U[p, col] == 0:
            raise SingularMatrixError(
                f"solve_linear: pivot {abs(U[p, col]):.3e} in column {col} "
                f"below {threshold:.3e}"
            )
        if p != col:
            U[[col, p]] = U[[p, col]]
            X[[col, p]] = X[[p, col]]
        for row in range(col + 1, r):
            factor = U[row, col] / U[col, col]
            if factor != 0:
                U[row, col:] -= factor * U[col, col:]
                X[row] -= factor * X[col]
    for col in range(r - 1, -1, -1):
        X[col] = (X[col] - U[col, col + 1:] @ X[col + 1:]) / U[col, col]
    return X


def _trig_series(A, tol: float, odd: bool, name: str) -> np.ndarray:
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionError(f"{name}: matrix {A.shape} is not square")
    if not tol > 0:
        raise ValueError(f"{name}: tol must be positive, got {tol}")
    A2 = A @ A
    term = A.copy() if odd else identity(n)
    total = term.copy()
    k = 1 if odd else 0  # power of the current term
    peak = frobenius_norm(term)
    for _ in range(MAX_SERIES_TERMS):
        if frobenius_norm(term) <= tol * (1.0 + frobenius_norm(total)):
            if peak > CANCELLATION_LIMIT * (1.0 + frobenius_norm(total)):
                raise SeriesConvergenceError(
                    f"{name}: cancellation, peak term {peak:.3g} against result "
                    f"{frobenius_norm(total):.3g} (||A||_F = {frobenius_norm(A):.3g})"
                )
            return total
        if k + 2 >= 2 * MAX_SERIES_TERMS:
            break
        term = -(term @ A2) / ((k + 1) * (k + 2))
        k += 2
        total = total + term
        peak = max(peak, frobenius_norm(term))
    raise SeriesConvergenceError(
        f"{name}: no convergence within {MAX_SERIES_TERMS} terms "
        f"(||A||_F = {frobenius_norm(A):.3g})"
    )


def mat_sin(A, tol: float = SERIES_TOL) -> np.ndarray:
    """Matrix sine by its Taylor series ``sum (-1)^k A^(2k+1) / (2k+1)!``."""
    return _trig_series(A, tol, odd=True, name="mat_sin")


def mat_cos(A, tol: float = SERIES_TOL) -> np.ndarray:
    """Matrix cosine by its Taylor series ``sum (-1)^k A^(2k) / (2k)!``."""
    return _trig_series(A, tol, odd=False, name="mat_cos")


def matrix_from_text(data: Any) -> np.ndarray:
    """Parse the nested-list text form.

    Each entry is either a real number or a ``[re, im]`` pair.
    """
    if not isinstance(data, (list, tuple)) or not data:
        raise ValueError("matrix must be a non-empty list of rows")
    rows = []
    width = None
    for row in data:
        if not isinstance(row, (list, tuple)):
            raise ValueError(f"matrix row must be a list, got {row!r}")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DimensionError(f"ragged matrix: row lengths {width} and {len(row)}")
        rows.append([_entry(v) for v in row])
    return as_matrix(rows)


def _entry(v: Any) -> complex:
    if isinstance(v, bool):
        raise ValueError(f"invalid matrix entry {v!r}")
    if isinstance(v, Number):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(p, Number) and not isinstance(p, bool) for p in v
    ):
        return complex(v[0], v[1])
    raise ValueError(f"invalid matrix entry {v!r}")


def matrix_to_text(A) -> list:
    """Inverse of :func:`matrix_from_text`; real entries are written as scalars."""
    out = []
    for row in as_matrix(A):
        out.append([float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)] for z in row])
    return out
