"""Accuracy checks against exact solutions.

Per-interval error tables, global convergence-order estimates under step
halving, and comparison with the published error table of the
``paper-example`` problem.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .builder import FixedPointConfig, build
from .linalg import frobenius_norm
from .problems import MatrixIVP, Oracle
from .spline import MatrixCubicSpline, global_coefficients

DEFAULT_SAMPLES = 101

# published per-interval maximum errors for paper-example, h = 0.1
PAPER_MAX_ERRORS = (
    1.0072e-6, 6.3032e-6, 2.0059e-5, 4.6213e-5, 8.8359e-5,
    1.4964e-4, 2.3267e-4, 3.3941e-4, 4.7114e-4, 6.2838e-4,
)

# Published global polynomials, coefficients of 1, x, x^2, x^3 per entry.
# Entry (1, 2) is identically zero in every row.
PAPER_COEFFS = (
    {(0, 0): (0, 1, 0, -0.1664), (1, 0): (0, 1, 0, -0.4986), (1, 1): (0, 1, 0, -0.1664)},
    {(0, 0): (0, 1.00005, -0.0005, -0.1647), (1, 0): (0, 1.0002, -0.0025, -0.4903),
     (1, 1): (0, 1.0001, -0.0005, -0.1647)},
    {(0, 0): (0, 1.0005, -0.0025, -0.1614), (1, 0): (-0.0001, 1.0022, -0.0124, -0.4738),
     (1, 1): (0, 1.0005, -0.0025, -0.1614)},
    {(0, 0): (-0.0002, 1.0018, -0.0069, -0.1565), (1, 0): (-0.0008, 1.0088, -0.0344, -0.4494),
     (1, 1): (-0.0002, 1.0018, -0.0069, -0.1565)},
    {(0, 0): (-0.0006, 1.0049, -0.0147, -0.1500), (1, 0): (-0.0028, 1.0242, -0.0728, -0.4174),
     (1, 1): (-0.0006, 1.0049, -0.0147, -0.1500)},
    {(0, 0): (-0.0016, 1.0109, -0.0266, -0.1420), (1, 0): (-0.0077, 1.0536, -0.1316, -0.3782),
     (1, 1): (-0.0016, 1.0109, -0.0266, -0.1420)},
    {(0, 0): (-0.0036, 1.0210, -0.0436, -0.1327), (1, 0): (-0.0176, 1.1030, -0.2140, -0.3324),
     (1, 1): (-0.0036, 1.0210, -0.0436, -0.1327)},
    {(0, 0): (-0.0073, 1.0368, -0.0661, -0.1219), (1, 0): (-0.0354, 1.1791, -0.3227, -0.2807),
     (1, 1): (-0.0073, 1.0368, -0.0661, -0.1219)},
    {(0, 0): (-0.0134, 1.0597, -0.0947, -0.1100), (1, 0): (-0.0646, 1.2885, -0.4595, -0.2237),
     (1, 1): (-0.0134, 1.0597, -0.0947, -0.1100)},
    {(0, 0): (-0.0229, 1.0914, -0.1299, -0.0970), (1, 0): (-0.1093, 1.4378, -0.6253, -0.1623),
     (1, 1): (-0.0229, 1.0914, -0.1299, -0.0970)},
)
ERROR_RTOL = 0.02
COEFF_ATOL = 1e-4


class FixtureError(ValueError):
    """Table does not have the shape of the published one."""


@dataclass(frozen=True)
class ErrorRow:
    interval: tuple[float, float]
    coeffs: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]  # global basis 1, x, x^2, x^3
    max_error: float


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]

    @property
    def max_errors(self) -> list[float]:
        return [r.max_error for r in self.rows]

    def to_csv(self) -> str:
        return table_to_csv(self)


def error_table(spline: MatrixCubicSpline, oracle: Oracle,
                samples_per_interval: int = DEFAULT_SAMPLES) -> ErrorTable:
    """Maximum of ``||S(x) - Y(x)||_F`` over equispaced samples in each interval."""
    if samples_per_interval < 2:
        raise ValueError(f"need at least 2 samples per interval, got {samples_per_interval}")
    knots = spline.partition.knots
    rows = []
    for k, piece in enumerate(spline.pieces):
        xl, xr = knots[k], knots[k + 1]
        err = 0.0
        for x in np.linspace(xl, xr, samples_per_interval):
            err = max(err, frobenius_norm(piece(float(x)) - oracle(float(x))))
        rows.append(ErrorRow((xl, xr), tuple(global_coefficients(piece)), err))
    return ErrorTable(tuple(rows))


def _fmt(z: complex) -> str:
    if z.imag == 0:
        return repr(float(z.real))
    return f"{float(z.real)!r}{float(z.imag):+.17g}j"


def table_to_csv(table: ErrorTable) -> str:
    """CSV text: interval bounds, max error, then global coefficients.

    Coefficient columns run over matrix entries in row-major order and, for
    each entry, over degrees 0..3.
    """
    r, q = table.rows[0].coeffs[0].shape
    header = ["interval_left", "interval_right", "max_error"]
    header += [f"y{i + 1}{j + 1}_x{d}" for i in range(r) for j in range(q) for d in range(4)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in table.rows:
        line = [repr(row.interval[0]), repr(row.interval[1]), repr(row.max_error)]
        line += [_fmt(row.coeffs[d][i, j]) for i in range(r) for j in range(q) for d in range(4)]
        w.writerow(line)
    return buf.getvalue()


def max_error(spline: MatrixCubicSpline, oracle: Oracle, samples: int = 1001) -> float:
    """Global maximum error over `samples` equispaced points of ``[a, b]``."""
    p = spline.partition
    return max(
        frobenius_norm(spline(float(x)) - oracle(float(x)))
        for x in np.linspace(p.a, p.b, samples)
    )


@dataclass(frozen=True)
class OrderEstimate:
    steps: tuple[float, ...]
    errors: tuple[float, ...]
    orders: Optional[tuple[float, ...]]  # None when the solution is reproduced exactly

    @property
    def exact(self) -> bool:
        return self.orders is None


EXACT_ATOL = 1e-13


def convergence_order(ivp: MatrixIVP, oracle: Oracle, n0: int = 10, levels: int = 3,
                      cfg: Optional[FixedPointConfig] = None,
                      samples: int = 1001) -> OrderEstimate:
    """Empirical order from builds at ``n0, 2 n0, ..., 2^(levels-1) n0``.

    Orders are ``log2(e_i / e_{i+1})``.  If every error is at round-off
    level the estimate is flagged exact and carries no orders.
    """
    if levels < 2:
        raise ValueError(f"need at least 2 levels, got {levels}")
    steps, errors = [], []
    for i in range(levels):
        spline, _ = build(ivp, n0 * 2**i, cfg)
        steps.append(spline.partition.h)
        errors.append(max_error(spline, oracle, samples))
    scale = max(1.0, frobenius_norm(ivp.Y0), frobenius_norm(ivp.Y1))
    if all(e <= EXACT_ATOL * scale for e in errors):
        return OrderEstimate(tuple(steps), tuple(errors), None)
    orders = tuple(math.log2(errors[i] / errors[i + 1]) for i in range(levels - 1))
    return OrderEstimate(tuple(steps), tuple(errors), orders)


@dataclass(frozen=True)
class RowDiscrepancy:
    interval: tuple[float, float]
    computed_error: float
    published_error: float
    error_rel_dev: float
    coeff_abs_dev: float

    @property
    def ok(self) -> bool:
        return self.error_rel_dev <= ERROR_RTOL and self.coeff_abs_dev <= COEFF_ATOL


def coefficient_deviation(row: ErrorRow, printed_coeffs: dict) -> float:
    """Largest gap between 4-decimal rounded coefficients and the printed ones."""
    dev = 0.0
    r, q = row.coeffs[0].shape
    for i in range(r):
        for j in range(q):
            printed = printed_coeffs.get((i, j), (0, 0, 0, 0))
            for d in range(4):
                ours = round(float(row.coeffs[d][i, j].real), 4)
                dev = max(dev, abs(ours - printed[d]), abs(float(row.coeffs[d][i, j].imag)))
    # both sides are short decimals; drop binary representation noise
    return round(dev, 10)


def compare_to_paper_table(table: ErrorTable) -> list[RowDiscrepancy]:
    """Per-row deviation from the published ``paper-example`` table (h = 0.1)."""
    if len(table.rows) != len(PAPER_MAX_ERRORS):
        raise FixtureError(f"expected {len(PAPER_MAX_ERRORS)} rows, got {len(table.rows)}")
    if table.rows[0].coeffs[0].shape != (2, 2):
        raise FixtureError(f"expected 2x2 coefficients, got {table.rows[0].coeffs[0].shape}")
    out = []
    for row, ref, coeffs in zip(table.rows, PAPER_MAX_ERRORS, PAPER_COEFFS):
        out.append(RowDiscrepancy(
            row.interval, row.max_error, ref,
            abs(row.max_error - ref) / ref,
            coefficient_deviation(row, coeffs),
        ))
    return out


def format_polynomial(coeffs: Sequence[complex], var: str = "x", cutoff: float = 5e-5) -> str:
    """Render ``sum c_m x^m`` with 4 significant digits, dropping terms below `cutoff`."""
    terms = []
    for m, c in enumerate(coeffs):
        c = complex(c)
        if abs(c) < cutoff:
            continue
        if c.imag == 0:
            mag, sign = f"{abs(c.real):.4g}", "-" if c.real < 0 else "+"
        else:
            mag, sign = f"({c.real:.4g}{c.imag:+.4g}j)", "+"
        mono = "" if m == 0 else (var if m == 1 else f"{var}^{m}")
        body = mag + mono if m == 0 or mag != "1" else mono
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text
