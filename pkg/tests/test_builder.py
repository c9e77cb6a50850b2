import math

import numpy as np
import pytest

from matspline import build, builtin_problem
from matspline.builder import (
    FixedPointConfig,
    NonConvergenceError,
    StepBoundError,
    advance_beta,
    coefficient_map,
    collocation_residuals,
    max_step,
    min_subintervals,
    solve_coefficient,
)
from matspline.linalg import SingularMatrixError, frobenius_norm, identity, zeros
from matspline.problems import GeneralFunction, LinearConstant, MatrixIVP, MissingLipschitzError
from matspline.spline import CubicPiece, continuity_report

from conftest import J, PAPER_A

L_PAPER = 2.82843


def wrapped(ivp, **kw):
    """Same problem with the linear rhs hidden behind a black-box function."""
    C = ivp.rhs.C
    return MatrixIVP(ivp.a, ivp.b, kw.get("Y0", ivp.Y0), kw.get("Y1", ivp.Y1),
                     GeneralFunction(lambda x, Y: C @ Y), lipschitz=kw.get("L", L_PAPER))


# -- step bound ----------------------------------------------------------------

def test_max_step_paper_value():
    assert round(max_step(L_PAPER), 5) == 1.45647


def test_max_step_trivial():
    assert max_step(6.0) == 1.0
    assert max_step(0.0) == math.inf
    with pytest.raises(ValueError):
        max_step(-1.0)


def test_min_subintervals():
    assert min_subintervals(0, 1, L_PAPER) == 1
    assert min_subintervals(0, 10, 6.0) == 11
    assert min_subintervals(0, 1, 0.0) == 1
    assert min_subintervals(0, 10, 6.1) == 11
    with pytest.raises(ValueError):
        min_subintervals(1, 1, 1.0)


def test_min_subintervals_satisfies_bound():
    for b, L in [(1, L_PAPER), (3.7, 10.0), (10, 6.0), (0.01, 1e6)]:
        n = min_subintervals(0, b, L)
        assert b / n < max_step(L)
        if n > 1:
            assert b / (n - 1) >= max_step(L)


# -- per-interval pieces -------------------------------------------------------

def scalar_first_a0(h):
    return -1.0 / (1.0 + h * h / 6.0)


def test_solve_coefficient_scalar_sine():
    h = 0.1
    sol = solve_coefficient(LinearConstant([[-1.0]]), h, np.array([[0.1]]), np.zeros((1, 1)), h)
    assert sol.A[0, 0].real == pytest.approx(scalar_first_a0(h), rel=1e-14)
    assert round(sol.A[0, 0].real / 6, 4) == -0.1664
    assert sol.iterations == 0 and sol.residual <= 1e-15


def test_solve_coefficient_zero_rhs():
    h = 0.25
    beta2 = np.array([[2.0, -4.0]])
    sol = solve_coefficient(LinearConstant(zeros(1, 1)), 1.0, np.ones((1, 2)), beta2, h)
    np.testing.assert_allclose(sol.A, -beta2 / h, atol=1e-15)
    free = solve_coefficient(LinearConstant(zeros(1, 1)), 1.0, np.ones((1, 2)), zeros(1, 2), h)
    np.testing.assert_array_equal(free.A, zeros(1, 2))


def test_branches_agree(rng):
    C = -PAPER_A
    cfg = FixedPointConfig()
    for _ in range(20):
        beta = rng.standard_normal((2, 3))
        beta2 = rng.standard_normal((2, 3))
        direct = solve_coefficient(LinearConstant(C), 0.3, beta, beta2, 0.1, cfg)
        fixed = solve_coefficient(GeneralFunction(lambda x, Y: C @ Y), 0.3, beta, beta2, 0.1, cfg)
        assert fixed.iterations > 0
        assert frobenius_norm(direct.A - fixed.A) <= 10 * cfg.tol


def test_advance_beta_scalar_sine():
    h = 0.1
    a0 = scalar_first_a0(h)
    piece = CubicPiece(0.0, [[0.0]], [[1.0]], [[0.0]], [[a0 / 6]])
    B0, B1, B2 = advance_beta(piece, h)
    assert B0[0, 0].real == pytest.approx(0.1 + a0 * h**3 / 6, rel=1e-15)
    assert round(B0[0, 0].real, 7) == 0.0998336
    assert B1[0, 0].real == pytest.approx(1 + a0 * h**2 / 2, rel=1e-15)
    assert B2[0, 0].real == pytest.approx(a0 * h, rel=1e-15)


def test_advance_beta_zero_and_cubic():
    z = zeros(2, 1)
    assert all(np.array_equal(m, z) for m in advance_beta(CubicPiece(0.0, z, z, z, z), 0.3))
    piece = CubicPiece(1.0, [[1.0]], [[2.0]], [[3.0]], [[4.0]])  # 1 + 2u + 3u^2 + 4u^3
    B0, B1, B2 = advance_beta(piece, 0.5)
    assert (B0[0, 0], B1[0, 0], B2[0, 0]) == (1 + 1 + 0.75 + 0.5, 2 + 3 + 3, 6 + 12)


def test_nonconvergence_carries_residual():
    rhs = GeneralFunction(lambda x, Y: -100.0 * Y)
    with pytest.raises(NonConvergenceError) as info:
        solve_coefficient(rhs, 1.0, np.ones((1, 1)), zeros(1, 1), 1.0, FixedPointConfig(max_iter=5))
    assert info.value.iterations == 5 and info.value.residual > 1


def test_singular_direct_system():
    with pytest.raises(SingularMatrixError):
        solve_coefficient(LinearConstant([[6.0]]), 1.0, np.ones((1, 1)), zeros(1, 1), 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        FixedPointConfig(tol=0)
    with pytest.raises(ValueError):
        FixedPointConfig(max_iter=0)


# -- full construction ---------------------------------------------------------

def test_paper_first_piece_closed_form(paper_spline):
    # (I + eps A) A0 = -A Y1 solved by hand for the lower-triangular A
    spline, _ = paper_spline
    eps = 0.1**2 / 6
    a11 = -1 / (1 + eps)
    a21 = 2 * eps / (1 + eps) ** 2 - 3 / (1 + eps)
    piece = spline.pieces[0]
    np.testing.assert_allclose(6 * piece.C3, [[a11, 0], [a21, a11]], rtol=1e-14, atol=1e-16)
    np.testing.assert_array_equal(piece.C2, zeros(2, 2))
    rounded = np.round(piece.C3.real, 4)
    assert rounded[0, 0] == rounded[1, 1] == -0.1664
    assert rounded[1, 0] == -0.4986 and rounded[0, 1] == 0


def test_scalar_sine_matches_trapezoid_recurrence():
    # S'' interpolates f linearly on every interval, so the knot values obey
    #   y'_{k+1} = y'_k + h (f_k + f_{k+1}) / 2
    #   y_{k+1}  = y_k + h y'_k + h^2 (f_k / 3 + f_{k+1} / 6)
    # which for f = -y is solved for y_{k+1} in closed form.
    ivp, _ = builtin_problem("scalar-sine")
    n = 10
    h = 1 / n
    spline, _ = build(ivp, n)
    y, yp = 0.0, 1.0
    for k in range(1, n + 1):
        y_new = (y + h * yp - h * h * y / 3) / (1 + h * h / 6)
        yp = yp - h * (y + y_new) / 2
        y = y_new
        x = min(k * h, 1.0)
        assert spline(x)[0, 0].real == pytest.approx(y, rel=1e-13)
        assert spline(x, 1)[0, 0].real == pytest.approx(yp, rel=1e-13)


def test_exact_cubic_with_forcing():
    # y'' = 6x, y(0) = y'(0) = 0 has solution x^3, reproduced exactly
    for rhs in (LinearConstant(zeros(1, 1), D=lambda x: [[6 * x]]),
                GeneralFunction(lambda x, Y: np.array([[6 * x]]))):
        ivp = MatrixIVP(0, 2, [[0.0]], [[0.0]], rhs, lipschitz=1.0)
        spline, _ = build(ivp, 7)
        for x in np.linspace(0, 2, 29):
            assert spline(x)[0, 0].real == pytest.approx(x**3, abs=1e-13)


def test_free_motion_exact():
    ivp, oracle = builtin_problem("free-motion")
    for n in (1, 3, 16):
        spline, report = build(ivp, n)
        for x in np.linspace(ivp.a, ivp.b, 33):
            assert frobenius_norm(spline(x) - oracle(x)) <= 1e-14
        assert report.lipschitz == 0.0


def test_initial_conditions_bitwise(paper):
    ivp, _ = paper
    spline, _ = build(wrapped(ivp), 10)
    np.testing.assert_array_equal(spline(ivp.a, 0), ivp.Y0)
    np.testing.assert_array_equal(spline(ivp.a, 1), ivp.Y1)


@pytest.mark.parametrize("general", [False, True])
def test_collocation_and_continuity(paper, general):
    ivp, _ = paper
    if general:
        ivp = wrapped(ivp)
    cfg = FixedPointConfig()
    for n in (3, 10, 25):
        spline, report = build(ivp, n, cfg)
        h = spline.partition.h
        res = collocation_residuals(spline, ivp)
        assert len(res) == n + 1
        assert max(res) <= 10 * cfg.tol / h
        scale = max(frobenius_norm(c) for p in spline.pieces for c in p.coeffs)
        assert max(max(j.jumps) for j in continuity_report(spline)) <= 1e-12 * max(1.0, scale)
        assert all(r.contraction_bound < 1 for r in report.records)


def test_contraction_ratio_on_wrapped_paper(paper):
    ivp = wrapped(paper[0])
    h = 0.1
    q = L_PAPER * h * h / 6
    assert q == pytest.approx(0.004714, abs=5e-7)
    spline, report = build(ivp, 10, FixedPointConfig(warm_start=False))
    assert all(r.contraction_bound == pytest.approx(q) for r in report.records)

    # iterate increments along a cold-started solve of every interval
    ratios = []
    for k, piece in enumerate(spline.pieces):
        B0, B1, B2 = piece.eval_local(0.0, 0), piece.eval_local(0.0, 1), piece.eval_local(0.0, 2)
        beta_next = B0 + h * B1 + h * h * B2 / 2
        sol = solve_coefficient(ivp.rhs, piece.x_left + h, beta_next, B2, h,
                                FixedPointConfig(tol=1e-15, max_iter=50))
        inc = sol.increments
        # ratios above the round-off floor of g
        ratios += [inc[i + 1] / inc[i] for i in range(len(inc) - 1) if inc[i] > 1e-6]
    assert len(ratios) >= 20
    assert max(ratios) <= q + 1e-9

    # and directly on the map g for widely separated arguments
    rng = np.random.default_rng(7)
    g = coefficient_map(ivp.rhs, 0.5, np.ones((2, 2)), np.ones((2, 2)), h)
    for _ in range(100):
        T1, T2 = rng.standard_normal((2, 2)) * 10, rng.standard_normal((2, 2)) * 10
        assert frobenius_norm(g(T1) - g(T2)) <= (q + 1e-9) * frobenius_norm(T1 - T2)


def test_warm_start_changes_iterations_not_answer(paper):
    ivp = wrapped(paper[0])
    cfg_w, cfg_c = FixedPointConfig(warm_start=True), FixedPointConfig(warm_start=False)
    warm, rw = build(ivp, 10, cfg_w)
    cold, rc = build(ivp, 10, cfg_c)
    assert rw.total_iterations < rc.total_iterations
    for pw, pc in zip(warm.pieces, cold.pieces):
        for cw, cc in zip(pw.coeffs, pc.coeffs):
            assert frobenius_norm(cw - cc) <= 10 * cfg_w.tol


def test_general_matches_direct_build(paper):
    ivp = paper[0]
    direct, _ = build(ivp, 10)
    fixed, _ = build(wrapped(ivp), 10)
    for pd, pf in zip(direct.pieces, fixed.pieces):
        assert frobenius_norm(6 * (pd.C3 - pf.C3)) <= 10 * FixedPointConfig().tol


@pytest.mark.parametrize("general", [False, True])
def test_additivity(paper, rng, general):
    ivp = paper[0]
    shape = (2, 3)
    Y0, Y1, Z0, Z1 = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for _ in range(4))

    def spline_for(a0, a1):
        prob = MatrixIVP(ivp.a, ivp.b, a0, a1, ivp.rhs, lipschitz=L_PAPER)
        if general:
            prob = wrapped(prob, Y0=a0, Y1=a1)
        return build(prob, 10, FixedPointConfig(tol=1e-14))[0]

    s1, s2, s12 = spline_for(Y0, Y1), spline_for(Z0, Z1), spline_for(Y0 + Z0, Y1 + Z1)
    for p1, p2, p12 in zip(s1.pieces, s2.pieces, s12.pieces):
        for c1, c2, c12 in zip(p1.coeffs, p2.coeffs, p12.coeffs):
            assert frobenius_norm(c12 - (c1 + c2)) <= 1e-10


def test_step_bound_rejected():
    ivp = MatrixIVP(0, 10, [[0.0]], [[1.0]], LinearConstant([[-6.0]]))
    with pytest.raises(StepBoundError) as info:
        build(ivp, 10)  # h = 1 = sqrt(6/6), not strictly below
    assert info.value.h == 1.0 and info.value.bound == 1.0
    spline, report = build(ivp, 10, check_step=False)
    assert report.records[0].contraction_bound == 1.0
    build(ivp, 11)


def test_override_without_lipschitz():
    ivp = MatrixIVP(0, 1, [[0.0]], [[1.0]], GeneralFunction(lambda x, Y: -Y))
    with pytest.raises(MissingLipschitzError):
        build(ivp, 10)
    spline, report = build(ivp, 10, check_step=False)
    assert math.isnan(report.lipschitz)
    assert spline(1.0)[0, 0].real == pytest.approx(math.sin(1.0), abs=2e-4)


def test_nonlinear_problem_converges():
    # y'' = 2 y^3, y(0) = 1, y'(0) = 1 has solution 1 / (1 - x); on [0, 0.5] |df/dy| <= 24
    ivp = MatrixIVP(0, 0.5, [[1.0]], [[1.0]], GeneralFunction(lambda x, Y: 2 * Y**3), lipschitz=24.0)
    errs = []
    for n in (20, 40, 80):
        spline, report = build(ivp, n)
        assert report.total_iterations > 0
        errs.append(max(abs(spline(x)[0, 0] - 1 / (1 - x)) for x in np.linspace(0, 0.5, 201)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)
