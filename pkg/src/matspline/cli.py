"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 step-bound rejection,
3 solver failure, 4 reproduction mismatch.  Every failure writes one line
``error[<reason>]: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .builder import (
    FixedPointConfig,
    NonConvergenceError,
    StepBoundError,
    build,
    max_step,
    min_subintervals,
)
from .linalg import SeriesConvergenceError, SingularMatrixError
from .problems import (
    MissingLipschitzError,
    ProblemFileError,
    ProblemLookupError,
    ProblemSpec,
    builtin_names,
    builtin_problem,
    lipschitz_of,
    load_problem,
)
from .spline import global_coefficients
from .verify import (
    DEFAULT_SAMPLES,
    ErrorRow,
    ErrorTable,
    compare_to_paper_table,
    convergence_order,
    error_table,
    format_polynomial,
    table_to_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STEP = 2
EXIT_SOLVER = 3
EXIT_MISMATCH = 4

COMMANDS = ("solve", "validate-step", "convergence", "reproduce-example")


class CliError(Exception):
    def __init__(self, code: int, reason: str, message: str):
        super().__init__(message)
        self.code = code
        self.reason = reason


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


@dataclass
class RunConfig:
    command: str
    problem: str = "paper-example"
    n: Optional[int] = None
    tol: Optional[float] = None
    output: Optional[str] = None
    samples: int = DEFAULT_SAMPLES
    levels: int = 3
    override_step_check: bool = False


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--problem", default="paper-example",
                        help=f"builtin name ({', '.join(builtin_names())}) or JSON problem file")
    common.add_argument("--n", type=_positive_int, help="number of subintervals")
    common.add_argument("--tol", type=_positive_float, help="fixed-point tolerance")
    common.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES,
                        help="error samples per interval")
    common.add_argument("--output", help="write the coefficient/error table as CSV")
    common.add_argument("--override-step-check", action="store_true",
                        help="build even if h >= sqrt(6/L)")

    parser = _Parser(prog="matspline",
                     description="Cubic matrix splines for Y'' = f(x, Y).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="build the spline and print its pieces")
    sub.add_parser("validate-step", parents=[common], help="check h against sqrt(6/L)")
    conv = sub.add_parser("convergence", parents=[common], help="step-halving order study")
    conv.add_argument("--levels", type=_positive_int, default=3)
    sub.add_parser("reproduce-example", parents=[common],
                   help="compare against the published paper-example table")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = make_parser().parse_args(argv)
    if ns.samples < 2:
        raise CliError(EXIT_USAGE, "usage", "--samples must be at least 2")
    return RunConfig(
        command=ns.command,
        problem=ns.problem,
        n=ns.n,
        tol=ns.tol,
        output=ns.output,
        samples=ns.samples,
        levels=getattr(ns, "levels", 3),
        override_step_check=ns.override_step_check,
    )


def _load(name: str) -> ProblemSpec:
    if name in builtin_names():
        ivp, oracle = builtin_problem(name)
        return ProblemSpec(ivp, oracle, None)
    if Path(name).exists():
        return load_problem(name)
    raise ProblemLookupError(
        f"{name!r} is neither a builtin problem ({', '.join(builtin_names())}) nor a file"
    )


def _choose_n(cfg: RunConfig, spec: ProblemSpec) -> int:
    if cfg.n is not None:
        return cfg.n
    if spec.n is not None:
        return spec.n
    ivp = spec.ivp
    return 10 * min_subintervals(ivp.a, ivp.b, lipschitz_of(ivp))


def _fp_config(cfg: RunConfig) -> FixedPointConfig:
    return FixedPointConfig(tol=cfg.tol) if cfg.tol is not None else FixedPointConfig()


def _write(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _cmd_solve(cfg: RunConfig, out) -> int:
    spec = _load(cfg.problem)
    n = _choose_n(cfg, spec)
    spline, report = build(spec.ivp, n, _fp_config(cfg), check_step=not cfg.override_step_check)
    if spec.oracle is not None:
        table = error_table(spline, spec.oracle, cfg.samples)
    else:
        table = ErrorTable(tuple(
            ErrorRow((p.x_left, spline.partition.knots[k + 1]), tuple(global_coefficients(p)), math.nan)
            for k, p in enumerate(spline.pieces)
        ))
    r, q = spline.shape
    print(f"problem {cfg.problem}: n={n}, h={spline.partition.h:.6g}, L={report.lipschitz:.6g}", file=out)
    for row in table.rows:
        head = f"[{row.interval[0]:.6g}, {row.interval[1]:.6g}]"
        if not math.isnan(row.max_error):
            head += f"  max error {row.max_error:.4e}"
        print(head, file=out)
        for i in range(r):
            for j in range(q):
                poly = format_polynomial([row.coeffs[d][i, j] for d in range(4)])
                print(f"  S[{i + 1},{j + 1}] = {poly}", file=out)
    print(f"fixed-point iterations {report.total_iterations}, "
          f"max residual {report.max_residual:.3e}, "
          f"contraction bound L h^2/6 = {report.lipschitz * report.h**2 / 6:.6g}", file=out)
    _write(cfg.output, table_to_csv(table))
    return EXIT_OK


def _cmd_validate_step(cfg: RunConfig, out) -> int:
    spec = _load(cfg.problem)
    ivp = spec.ivp
    L = lipschitz_of(ivp)
    bound = max_step(L)
    n = _choose_n(cfg, spec)
    h = (ivp.b - ivp.a) / n
    ok = h < bound
    print(f"L = {L:.6g}", file=out)
    print(f"sqrt(6/L) = {bound:.5f}" if math.isfinite(bound) else "sqrt(6/L) = unbounded", file=out)
    print(f"n = {n}, h = {h:.6g}", file=out)
    if ok:
        print(f"h={h:.6g} < {bound:.5f}, accept", file=out)
        return EXIT_OK
    raise CliError(EXIT_STEP, "step-bound", f"h={h:.6g} >= sqrt(6/L)={bound:.5f}, reject")


def _cmd_convergence(cfg: RunConfig, out) -> int:
    spec = _load(cfg.problem)
    if spec.oracle is None:
        raise CliError(EXIT_USAGE, "no-oracle", f"problem {cfg.problem!r} has no exact solution")
    if cfg.levels < 2:
        raise CliError(EXIT_USAGE, "usage", "--levels must be at least 2")
    n0 = cfg.n if cfg.n is not None else 10
    if not cfg.override_step_check:
        bound = max_step(lipschitz_of(spec.ivp))
        h0 = (spec.ivp.b - spec.ivp.a) / n0
        if not h0 < bound:
            raise StepBoundError(h0, bound)
    est = convergence_order(spec.ivp, spec.oracle, n0, cfg.levels, _fp_config(cfg))
    print(f"{'h':>12} {'max error':>14} {'order':>8}", file=out)
    for i, (h, e) in enumerate(zip(est.steps, est.errors)):
        if est.exact:
            order = "exact"
        else:
            order = f"{est.orders[i - 1]:.4f}" if i > 0 else ""
        print(f"{h:12.6g} {e:14.5e} {order:>8}", file=out)
    if est.exact:
        print("solution reproduced to round-off; order not defined", file=out)
    return EXIT_OK


def _cmd_reproduce(cfg: RunConfig, out) -> int:
    ivp, oracle = builtin_problem("paper-example")
    spline, _ = build(ivp, 10, _fp_config(cfg))
    table = error_table(spline, oracle, cfg.samples)
    rows = compare_to_paper_table(table)
    print(f"{'interval':>12} {'computed':>12} {'published':>12} {'rel.dev':>9} {'coef.dev':>9}", file=out)
    bad = []
    for k, row in enumerate(rows):
        tag = "ok" if row.error_rel_dev <= 0.02 else "MISMATCH"
        if tag != "ok":
            bad.append(k)
        iv = f"[{row.interval[0]:.1f},{row.interval[1]:.1f}]"
        print(f"{iv:>12} {row.computed_error:12.4e} {row.published_error:12.4e} "
              f"{row.error_rel_dev:9.2%} {row.coeff_abs_dev:9.1e}  {tag}", file=out)
    _write(cfg.output, table_to_csv(table))
    if bad:
        raise CliError(EXIT_MISMATCH, "reproduction-mismatch",
                       f"rows {bad} deviate more than 2% from the published errors")
    print("all rows within 2% of the published errors", file=out)
    return EXIT_OK


_DISPATCH = {
    "solve": _cmd_solve,
    "validate-step": _cmd_validate_step,
    "convergence": _cmd_convergence,
    "reproduce-example": _cmd_reproduce,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Execute one command; returns the process exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return _DISPATCH[cfg.command](cfg, out)
    except CliError as exc:
        reason, code, msg = exc.reason, exc.code, str(exc)
    except StepBoundError as exc:
        reason, code, msg = "step-bound", EXIT_STEP, str(exc)
    except (NonConvergenceError, SingularMatrixError, SeriesConvergenceError) as exc:
        reason, code, msg = "solver", EXIT_SOLVER, str(exc)
    except (ProblemFileError, ProblemLookupError, MissingLipschitzError) as exc:
        reason, code, msg = "input", EXIT_USAGE, exc.args[0] if exc.args else str(exc)
    except OSError as exc:
        reason, code, msg = "io", EXIT_USAGE, str(exc)
    print(f"error[{reason}]: {' '.join(str(msg).split())}", file=err)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_args(argv)
    except CliError as exc:
        print(f"error[{exc.reason}]: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
