import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vekua.errors import ConfigError, DegenerateRho, QuadratureFailure, ResonantMode, SingularMonodromy
from vekua.group import ModeScalars, circle_model
from vekua.modes import (SolverGrid, VekuaParams, build_mode_system, mtilde, oracle_shooting, rho_branch,
                         solve_mode, solve_mode_forced, t_inverse, t_matrix)
from vekua.trigpoly import TWO_PI, CTrigPoly, TrigPoly

ONE = TrigPoly.constant(1.0)
ZERO = TrigPoly.constant(0.0)


def params(delta, alpha, s=ZERO, q=ONE, lam=0.0, p0=0.0):
    return VekuaParams(circle_model(lam=lam, p0=p0), delta, alpha, s, q)


def manufactured_forcing(p, a, b, w1, w2):
    """``F = w' - M(t) w`` for exact trigonometric profiles ``w``."""
    q, s = p.q.to_complex(), p.s.to_complex()
    d11 = s + q * (1j * p.delta - a) + 1j * b
    d22 = s + q * (a - 1j * p.delta) + 1j * b
    F1 = w1.derivative() - d11 * w1 - q * p.alpha * w2
    F2 = w2.derivative() - d22 * w2 - q * np.conj(p.alpha) * w1
    return F1, F2


@pytest.mark.parametrize("a, delta, alpha, expected", [
    (0.0, 0.0, 1.0, 1.0),
    (0.0, 2.0, 1.0, 1j * math.sqrt(3)),
    (0.0, 1.0, 1.0, 0.0),
])
def test_rho_examples(a, delta, alpha, expected):
    assert rho_branch(a, delta, alpha) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-5, 5), st.floats(-5, 5), st.complex_numbers(max_magnitude=5, min_magnitude=0.1))
def test_rho_branch_and_diagonalization(a, delta, alpha):
    rho = rho_branch(a, delta, alpha)
    assert rho ** 2 == pytest.approx((a - 1j * delta) ** 2 + abs(alpha) ** 2, abs=1e-9)
    assert rho.real > 0 or (rho.real == 0 and rho.imag >= 0)
    if abs(rho) < 1e-3:
        return
    T, Ti = t_matrix(a, delta, alpha, rho), t_inverse(a, delta, alpha, rho)
    assert np.allclose(T @ Ti, np.eye(2), atol=1e-9)
    assert np.allclose(Ti @ mtilde(a, delta, alpha) @ T, np.diag([rho, -rho]), atol=1e-8 * (1 + abs(rho)))


def test_build_mode_system_dissipative():
    sys = build_mode_system(params(0.0, 1.0), ModeScalars(0.0, 0.0, 1.0))
    assert sys.rho == pytest.approx(1.0)
    assert sys.D1 == pytest.approx(math.exp(-TWO_PI) - 1)
    assert sys.D2 == pytest.approx(1 - math.exp(-TWO_PI))


def test_build_mode_system_resonant_witness():
    p = params(math.sqrt(2), 1.0)
    with pytest.raises(ResonantMode):
        build_mode_system(p, ModeScalars(0.0, 0.0, 1.0))
    sys = build_mode_system(p, ModeScalars(0.0, 0.0, 1.0), check=False)
    assert sys.rho == pytest.approx(1j)
    assert abs(sys.D2) < 1e-14


def test_degenerate_rho_and_zero_alpha():
    with pytest.raises(DegenerateRho):
        build_mode_system(params(1.0, 1.0), ModeScalars(0.0, 0.0, 1.0))
    with pytest.raises(ConfigError, match="alpha"):
        params(1.0, 0.0)


def test_zero_forcing_gives_zero():
    p = params(0.3, 1.2)
    sys = build_mode_system(p, ModeScalars(0.2, 0.5, 1.0))
    sol = solve_mode(sys, CTrigPoly.zero(), CTrigPoly.zero(), SolverGrid(p, 64))
    assert sol.K1 == 0 and sol.K2 == 0
    assert not np.any(sol.w1) and not np.any(sol.w2)


def test_constant_forcing_closed_form():
    c = 0.7 - 0.2j
    p = params(0.0, 1.0)
    sys = build_mode_system(p, ModeScalars(0.0, 0.0, 1.0))
    grid = SolverGrid(p, 256)
    sol = solve_mode(sys, CTrigPoly.constant(c), CTrigPoly.zero(), grid)
    assert np.max(np.abs(sol.z1 + c)) < 1e-9
    assert np.max(np.abs(sol.z2)) == 0


def test_constant_forcing_matches_oracle():
    c = 0.7 - 0.2j
    p = params(0.0, 1.0)
    sys = build_mode_system(p, ModeScalars(0.0, 0.0, 1.0))
    F1 = sys.T[0, 0] * c
    F2 = sys.T[1, 0] * c
    sol = solve_mode_forced(sys, CTrigPoly.constant(F1), CTrigPoly.constant(F2), SolverGrid(p, 256))
    orc = oracle_shooting(p, 0.0, 0.0, [CTrigPoly.constant(F1)], [CTrigPoly.constant(F2)], n_t=256)
    ref = np.abs(np.r_[orc.w1[0], orc.w2[0]]).max()
    assert np.max(np.abs(sol.w1 - orc.w1[0])) <= 1e-6 * ref
    assert np.max(np.abs(sol.w2 - orc.w2[0])) <= 1e-6 * ref


def test_oracle_zero_forcing_and_singular():
    p = params(0.4, 1.0)
    orc = oracle_shooting(p, 0.0, 0.3, [CTrigPoly.zero()], [CTrigPoly.zero()], n_t=32, refine=2)
    assert not np.any(orc.w1)
    with pytest.raises(SingularMonodromy):
        oracle_shooting(params(math.sqrt(2), 1.0), 0.0, 0.0, [CTrigPoly.constant(1.0)],
                        [CTrigPoly.zero()], n_t=64, refine=4)


CASES = [
    # (delta, alpha, s, q, a, b)
    (0.5, 2.0, TrigPoly.from_coefficients(0.05, {1: 0.2}), TrigPoly.from_coefficients(1, {1: 0.5}, {2: 0.3}),
     0.0, 0.7),
    (1.0, 0.5 + 0.3j, TrigPoly.from_coefficients(0.1), TrigPoly.from_coefficients(1, {1: 0.5}), 0.8, -1.3),
    (2.0, 1.0, TrigPoly.from_coefficients(-0.2, {2: 0.1}), ONE, -0.4, 2.5),
]


@pytest.mark.parametrize("delta, alpha, s, q, a, b", CASES)
def test_manufactured_mode_recovered(delta, alpha, s, q, a, b, rng):
    p = params(delta, alpha, s, q)
    w1, w2 = CTrigPoly.random(rng, 3), CTrigPoly.random(rng, 2)
    F1, F2 = manufactured_forcing(p, a, b, w1, w2)
    sys = build_mode_system(p, ModeScalars(a, b, 1.0))
    grid = SolverGrid(p, 256)
    sol = solve_mode_forced(sys, F1, F2, grid)
    assert np.max(np.abs(sol.w1 - w1(grid.t))) < 1e-10
    assert np.max(np.abs(sol.w2 - w2(grid.t))) < 1e-10
    assert sol.twist_residual < 1e-10


@pytest.mark.parametrize("delta, alpha, s, q, a, b", CASES)
def test_closed_form_matches_oracle(delta, alpha, s, q, a, b, rng):
    p = params(delta, alpha, s, q)
    F1, F2 = CTrigPoly.random(rng, 4), CTrigPoly.random(rng, 4)
    sys = build_mode_system(p, ModeScalars(a, b, 1.0))
    sol = solve_mode_forced(sys, F1, F2, SolverGrid(p, 256))
    orc = oracle_shooting(p, a, b, [F1], [F2], n_t=256, refine=8)
    assert np.max(np.abs(sol.w1 - orc.w1[0])) < 1e-8
    assert np.max(np.abs(sol.w2 - orc.w2[0])) < 1e-8


def test_grid_doubling_converges():
    # non-polynomial forcing so the quadrature error is visible above roundoff
    p = params(0.5, 2.0, TrigPoly.from_coefficients(0.05, {1: 0.2}), TrigPoly.from_coefficients(1, {1: 0.9}))
    sys = build_mode_system(p, ModeScalars(0.0, 0.7, 1.0))

    def F(t):
        return 1.0 / (1.05 + np.cos(t))

    def solve(n):
        return solve_mode_forced(sys, F, F, SolverGrid(p, n)).w1

    ref = solve(2048)
    errs = [np.max(np.abs(solve(n) - ref[:: 2048 // n])) for n in (32, 64, 128)]
    assert errs[0] > 1e-9
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 < 1e-12 or e0 / e1 >= 16


def test_underresolved_grid_rejected():
    p = params(0.0, 1.0)
    sys = build_mode_system(p, ModeScalars(0.0, 40.0, 1.0))
    with pytest.raises(QuadratureFailure):
        solve_mode(sys, CTrigPoly.constant(1.0), CTrigPoly.zero(), SolverGrid(p, 64))


def test_sampled_profile_size_checked():
    p = params(0.0, 1.0)
    sys = build_mode_system(p, ModeScalars(0.0, 0.0, 1.0))
    with pytest.raises(ConfigError):
        solve_mode(sys, np.ones(10), np.ones(10), SolverGrid(p, 16))
    with pytest.raises(ConfigError):
        SolverGrid(p, 2)


def test_twist_boundary_condition():
    p = params(0.3, 1.5, TrigPoly.constant(0.2))
    sys = build_mode_system(p, ModeScalars(0.1, 0.37, 1.0))
    assert sys.E == pytest.approx(cmath.exp(2j * math.pi * 0.37 + p.s0))
    sol = solve_mode(sys, CTrigPoly.constant(1.0), CTrigPoly.constant(-0.5j), SolverGrid(p, 128))
    assert abs(sol.z1[0] - sys.E * sol.z1[-1]) < 1e-12
    assert abs(sol.z2[0] - sys.E * sol.z2[-1]) < 1e-12
    assert abs(sol.w1[0] - sol.w1[-1]) < 1e-12
