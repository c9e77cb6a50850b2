"""Second-order matrix initial value problems ``Y'' = f(x, Y)``.

A problem carries its interval, the initial value and slope, a right-hand
side and (optionally) a Lipschitz constant for ``f`` in its matrix argument.
A small registry of builtin problems with known exact solutions is provided
for verification.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .linalg import (
    DimensionError,
    as_matrix,
    frobenius_norm,
    identity,
    mat_cos,
    mat_sin,
    matrix_from_text,
    solve_linear,
    zeros,
)

MatrixFn = Callable[[float], np.ndarray]


class MissingLipschitzError(ValueError):
    """No Lipschitz constant is known for a black-box right-hand side."""


class ProblemLookupError(KeyError):
    """Unknown builtin problem name."""


class ProblemFileError(ValueError):
    """A problem file could not be parsed."""


@dataclass(frozen=True)
class LinearConstant:
    """``f(x, Y) = C @ Y + D(x)`` with a constant square ``C``."""

    C: np.ndarray
    D: Optional[MatrixFn] = None

    def __post_init__(self):
        C = as_matrix(self.C)
        if C.shape[0] != C.shape[1]:
            raise DimensionError(f"LinearConstant: C must be square, got {C.shape}")
        object.__setattr__(self, "C", C)

    def __call__(self, x: float, Y: np.ndarray) -> np.ndarray:
        out = self.C @ Y
        if self.D is not None:
            out = out + as_matrix(self.D(x))
        return out


@dataclass(frozen=True)
class GeneralFunction:
    """Arbitrary ``f(x, Y)``; must be a pure function."""

    eval: Callable[[float, np.ndarray], np.ndarray]

    def __call__(self, x: float, Y: np.ndarray) -> np.ndarray:
        return as_matrix(self.eval(x, Y))


Rhs = Union[LinearConstant, GeneralFunction]


@dataclass(frozen=True)
class MatrixIVP:
    a: float
    b: float
    Y0: np.ndarray
    Y1: np.ndarray
    rhs: Rhs
    lipschitz: Optional[float] = None

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not b > a:
            raise ValueError(f"need finite a < b, got a={a}, b={b}")
        Y0, Y1 = as_matrix(self.Y0), as_matrix(self.Y1)
        if Y0.shape != Y1.shape:
            raise DimensionError(f"Y0 {Y0.shape} and Y1 {Y1.shape} differ in shape")
        if isinstance(self.rhs, LinearConstant) and self.rhs.C.shape[0] != Y0.shape[0]:
            raise DimensionError(
                f"C {self.rhs.C.shape} does not act on Y of shape {Y0.shape}"
            )
        if self.lipschitz is not None and not float(self.lipschitz) >= 0:
            raise ValueError(f"lipschitz must be non-negative, got {self.lipschitz}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "Y0", Y0)
        object.__setattr__(self, "Y1", Y1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.Y0.shape

    def f(self, x: float, Y: np.ndarray) -> np.ndarray:
        return self.rhs(x, Y)


@dataclass(frozen=True)
class Oracle:
    """Known exact solution ``x -> Y(x)``."""

    exact: MatrixFn
    name: str = field(default="")

    def __call__(self, x: float) -> np.ndarray:
        return as_matrix(self.exact(x))


def lipschitz_of(ivp: MatrixIVP) -> float:
    """Lipschitz constant of ``f`` in ``Y`` (Frobenius norm).

    A user-supplied value always wins.  For ``LinearConstant`` the bound
    ``||C||_F`` is used; it may be 0 (the zero map), which places no
    restriction on the step.
    """
    if ivp.lipschitz is not None:
        return float(ivp.lipschitz)
    if isinstance(ivp.rhs, LinearConstant):
        return frobenius_norm(ivp.rhs.C)
    raise MissingLipschitzError(
        "a Lipschitz constant must be supplied for a general right-hand side"
    )


# -- builtin problems ---------------------------------------------------------

PAPER_A = np.array([[1, 0], [2, 1]], dtype=np.complex128)
PAPER_ROOT = np.array([[1, 0], [1, 1]], dtype=np.complex128)  # PAPER_ROOT @ PAPER_ROOT == PAPER_A
PAPER_L = 2.82843


def _paper_oracle(a: float, Y0: np.ndarray, Y1: np.ndarray) -> MatrixFn:
    # cos(R t) Y0 + R^{-1} sin(R t) Y1 with R the square root of A
    Rinv = solve_linear(PAPER_ROOT, identity(2))

    def exact(x: float) -> np.ndarray:
        Rt = PAPER_ROOT * (x - a)
        return mat_cos(Rt) @ Y0 + Rinv @ mat_sin(Rt) @ Y1

    return exact


def _scalar_sine_oracle(a: float, Y0: np.ndarray, Y1: np.ndarray) -> MatrixFn:
    return lambda x: math.cos(x - a) * Y0 + math.sin(x - a) * Y1


def _free_oracle(a: float, Y0: np.ndarray, Y1: np.ndarray) -> MatrixFn:
    return lambda x: Y0 + Y1 * (x - a)


def paper_example() -> tuple[MatrixIVP, Oracle]:
    """``Y'' + A Y = 0`` on [0, 1], ``A = [[1, 0], [2, 1]]``, ``Y(0) = 0``, ``Y'(0) = [[1, 0], [1, 1]]``."""
    ivp = MatrixIVP(0.0, 1.0, zeros(2, 2), PAPER_ROOT.copy(), LinearConstant(-PAPER_A), lipschitz=PAPER_L)

    def exact(t: float) -> np.ndarray:
        s, c = math.sin(t), math.cos(t)
        return np.array([[s, 0.0], [t * c, s]], dtype=np.complex128)

    return ivp, Oracle(exact, "paper-example")


def free_motion() -> tuple[MatrixIVP, Oracle]:
    Y0 = np.array([[1.0, -2.0], [0.5, 3.0]])
    Y1 = np.array([[0.25, 1.0], [-1.5, 0.0]])
    ivp = MatrixIVP(0.0, 1.0, Y0, Y1, LinearConstant(zeros(2, 2)))
    return ivp, Oracle(_free_oracle(ivp.a, ivp.Y0, ivp.Y1), "free-motion")


def scalar_sine() -> tuple[MatrixIVP, Oracle]:
    ivp = MatrixIVP(0.0, 1.0, [[0.0]], [[1.0]], LinearConstant([[-1.0]]))
    return ivp, Oracle(lambda x: np.array([[math.sin(x)]], dtype=np.complex128), "scalar-sine")


_REGISTRY = {
    "paper-example": paper_example,
    "free-motion": free_motion,
    "scalar-sine": scalar_sine,
}

# right-hand sides usable from problem files: (rhs for r rows, default L, oracle factory)
_RHS_REGISTRY = {
    "paper-example": (lambda r: LinearConstant(-PAPER_A), PAPER_L, _paper_oracle),
    "free-motion": (lambda r: LinearConstant(zeros(r, r)), None, _free_oracle),
    "scalar-sine": (lambda r: LinearConstant(-identity(r)), None, _scalar_sine_oracle),
}


def builtin_names() -> list[str]:
    return sorted(_REGISTRY)


def builtin_problem(name: str) -> tuple[MatrixIVP, Oracle]:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ProblemLookupError(
            f"unknown problem {name!r}; available: {', '.join(builtin_names())}"
        ) from None
    return factory()


# -- problem files ------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """A problem file after parsing."""

    ivp: MatrixIVP
    oracle: Optional[Oracle]
    n: Optional[int]


def parse_problem(doc: dict) -> ProblemSpec:
    """Build a problem from the decoded problem-file document.

    Fields: ``a``, ``b``, ``Y0``, ``Y1``, ``rhs`` and optionally ``n`` and
    ``lipschitz``.  ``rhs`` is ``{"kind": "linear_constant", "C": matrix}``
    or ``{"kind": "builtin", "name": ...}``.
    """
    if not isinstance(doc, dict):
        raise ProblemFileError("problem document must be an object")
    try:
        a, b = float(doc["a"]), float(doc["b"])
        Y0 = matrix_from_text(doc["Y0"])
        Y1 = matrix_from_text(doc["Y1"])
        rhs_doc = doc["rhs"]
    except KeyError as exc:
        raise ProblemFileError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(str(exc)) from None

    oracle = None
    lipschitz = doc.get("lipschitz")
    kind = rhs_doc.get("kind") if isinstance(rhs_doc, dict) else None
    if kind == "linear_constant":
        if "C" not in rhs_doc:
            raise ProblemFileError("linear_constant rhs needs field 'C'")
        try:
            rhs = LinearConstant(matrix_from_text(rhs_doc["C"]))
        except ValueError as exc:
            raise ProblemFileError(str(exc)) from None
        if not np.any(rhs.C):
            oracle = Oracle(_free_oracle(a, Y0, Y1), "free-motion")
    elif kind == "builtin":
        name = rhs_doc.get("name")
        if name not in _RHS_REGISTRY:
            raise ProblemFileError(
                f"unknown builtin rhs {name!r}; available: {', '.join(sorted(_RHS_REGISTRY))}"
            )
        make_rhs, default_l, make_oracle = _RHS_REGISTRY[name]
        if name == "paper-example" and Y0.shape[0] != 2:
            raise ProblemFileError(f"paper-example rhs needs 2 rows, got {Y0.shape}")
        rhs = make_rhs(Y0.shape[0])
        if lipschitz is None:
            lipschitz = default_l
        oracle = Oracle(make_oracle(a, Y0, Y1), name)
    else:
        raise ProblemFileError(f"unknown rhs kind {kind!r}")

    if lipschitz is not None and (isinstance(lipschitz, bool) or not isinstance(lipschitz, (int, float))):
        raise ProblemFileError(f"lipschitz must be a number, got {lipschitz!r}")
    n = doc.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 1):
        raise ProblemFileError(f"n must be a positive integer, got {n!r}")
    try:
        ivp = MatrixIVP(a, b, Y0, Y1, rhs, lipschitz=lipschitz)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None
    return ProblemSpec(ivp, oracle, n)


def load_problem(path: Union[str, Path]) -> ProblemSpec:
    """Read a JSON problem file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_problem(doc)
