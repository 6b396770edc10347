import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vekua.conditions import (Spectrum, classify_lambda0, dc_prime_equivalence, diophantine_check,
                              find_resonances, global_constants, resonance_cross_check,
                              resonances_bruteforce, resonances_quadratic)
from vekua.errors import HypothesisViolation
from vekua.group import GroupFactor, GroupModel, ModeScalars, circle_model, su2_model
from vekua.modes import VekuaParams
from vekua.trigpoly import TWO_PI, TrigPoly

ONE = TrigPoly.constant(1.0)
ZERO = TrigPoly.constant(0.0)


def params(delta, alpha, s=ZERO, q=ONE, model=None):
    return VekuaParams(model or circle_model(), delta, alpha, s, q)


def exact_hits(c, spectrum, k_bound):
    """Independent brute force using the complex form of the resonance system."""
    hits = set()
    A0, B0 = c.A0, c.B0
    for i, (a, b) in enumerate(zip(spectrum.a, spectrum.b)):
        for k in range(-k_bound, k_bound + 1):
            z = TWO_PI * k + TWO_PI * b + 1j * a * c.q0
            e1 = (A0 * (TWO_PI * k + np.conj(TWO_PI * b + 1j * a * c.q0))).real
            e2 = abs(z) ** 2 - (abs(A0) ** 2 - abs(B0) ** 2)
            scale = abs(z) ** 2 + abs(A0) ** 2 + abs(B0) ** 2 + 1
            if abs(e1) <= 1e-9 * math.sqrt(scale) * (1 + c.q0) ** 2 and abs(e2) <= 1e-9 * scale:
                hits.add((i, k))
    return hits


def test_global_constants_examples():
    c = global_constants(params(2.0, 1.0))
    assert c.A0 == pytest.approx(4j * math.pi)
    assert c.B0 == pytest.approx(TWO_PI)
    assert c.q0 == pytest.approx(TWO_PI)
    c = global_constants(params(0.0, 1.0, s=TrigPoly.constant(1 / TWO_PI)))
    assert c.A0 == pytest.approx(1.0)


def test_witness_hits_every_mode_at_k_pm1():
    model = GroupModel((GroupFactor.circle(), GroupFactor.su2()), (0, 0), (0, 0))
    p = params(math.sqrt(2), 1.0, model=model)
    sp = Spectrum.from_model(model, (2, 1))
    hits = find_resonances(global_constants(p), sp, 50)
    assert {h.k for h in hits} == {-1, 1}
    assert len(hits) == 2 * len(sp)
    assert max(max(abs(h.r1), abs(h.r2)) for h in hits) < 1e-12
    assert exact_hits(global_constants(p), sp, 50) == {(i, k) for i in range(len(sp)) for k in (-1, 1)}


def test_no_hits_when_B0_dominates():
    p = params(0.5, 2.0)
    sp = Spectrum.from_model(circle_model(p0=0.3), (20,))
    assert find_resonances(global_constants(p), sp, 50) == []


spectra = st.lists(st.tuples(st.floats(-3, 3), st.sampled_from([0.0, 0.5, -0.25, 1.0, 0.3, 1 / 3])),
                   min_size=1, max_size=6)


@given(st.floats(-1, 1), st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.3, 2), spectra)
def test_quadratic_equals_bruteforce(s0, delta, alpha, qmean, ab):
    p = params(delta, alpha, s=TrigPoly.constant(s0), q=TrigPoly.constant(qmean))
    sp = Spectrum.from_scalars([ModeScalars(a, b, 1.0) for a, b in ab])
    res = resonance_cross_check(global_constants(p), sp, 30)
    assert res["agree"]


@given(st.integers(-5, 5), st.sampled_from([0.0, 0.25, 0.5]), st.floats(0.5, 2.0))
def test_constructed_resonances_found(k, b, qmean):
    # pick |alpha| so that (2 pi (k + b))^2 = |A0|^2 - |B0|^2 with s0 = 0, a = 0
    q0 = TWO_PI * qmean
    x = TWO_PI * (k + b)
    delta = 3.0 * (abs(x) + 1) / q0
    alpha = math.sqrt(delta ** 2 - (x / q0) ** 2)
    p = params(delta, alpha, q=TrigPoly.constant(qmean))
    sp = Spectrum.from_scalars([ModeScalars(0.0, b, 1.0)])
    c = global_constants(p)
    quad = resonances_quadratic(c, sp)
    assert (0, k) in quad
    assert quad == resonances_bruteforce(c, sp, 10)
    assert exact_hits(c, sp, 10) == quad


@given(st.floats(0.2, 3), st.floats(0.1, 3), st.floats(-0.5, 0.5), st.floats(0.3, 4))
def test_resonances_invariant_under_q_scaling(delta, alpha, s0, c):
    # with lambda = 0 the system only sees delta q0, alpha q0 and s0
    sp = Spectrum.from_model(circle_model(p0=0.5), (6,))
    p1 = params(delta, alpha, s=TrigPoly.constant(s0))
    p2 = params(delta / c, alpha / c, s=TrigPoly.constant(s0), q=TrigPoly.constant(c))
    h1 = {(h.b, h.k) for h in find_resonances(global_constants(p1), sp, 20)}
    h2 = {(h.b, h.k) for h in find_resonances(global_constants(p2), sp, 20)}
    assert h1 == h2


def test_dc_holds_for_irrational_rotation():
    p = params(2.0, 1.0)  # omega = sqrt(3), q0 omega = 2 pi sqrt(3)
    sp = Spectrum.from_model(su2_model(), (10,))
    rep = diophantine_check(p, sp, 2.0, kind="DC")
    expected = TWO_PI * abs(math.sqrt(3) - 2)
    assert min(m for _, m in rep.table) == pytest.approx(expected, rel=1e-12)
    assert rep.holds and rep.kind == "DC"


def test_dc_violated_at_integer_rotation():
    model = circle_model(p0=1.0)
    p = params(math.sqrt(2), 1.0, model=model)
    rep = diophantine_check(p, Spectrum.from_model(model, (10,)), 2.0)
    assert not rep.holds
    assert rep.witness["quantity"] == pytest.approx(0.0, abs=1e-12)
    assert rep.verdict == "violated"


def test_denominators_uniform_when_dissipative():
    model = circle_model(p0=1.0)
    p = params(0.5, 2.0, s=TrigPoly.constant(0.3), model=model)
    rep = diophantine_check(p, Spectrum.from_model(model, (100,)), 2.0)
    assert rep.kind == "III" and rep.holds
    mins = np.array([m for _, m in rep.table])
    assert np.ptp(mins) < 1e-12 * mins.max()
    decay, E = math.exp(-math.sqrt(2.0 ** 2 - 0.5 ** 2) * TWO_PI), math.exp(0.3 * TWO_PI)
    assert mins[0] == pytest.approx(min(abs(decay - E), abs(1 - decay * E)), rel=1e-12)


def test_dc_requires_hypothesis():
    with pytest.raises(HypothesisViolation):
        diophantine_check(params(0.5, 2.0), Spectrum.from_model(circle_model(), (3,)), 2.0, kind="DC")


def test_certified_only_with_covered_residues():
    model = circle_model(p0=0.25)
    p = params(2.0, 1.0, model=model)
    assert diophantine_check(p, Spectrum.from_model(model, (8,)), 2.0, truncation=(8,)).certified
    assert not diophantine_check(p, Spectrum.from_model(model, (2,)), 2.0, truncation=(2,)).certified


@given(st.floats(0.5, 4), st.floats(0, 3))
def test_bound_monotone_in_M(M, extra):
    model = circle_model(p0=math.sqrt(2))
    p = params(2.0, 1.0, model=model)
    sp = Spectrum.from_model(model, (60,))
    if diophantine_check(p, sp, M).holds:
        assert diophantine_check(p, sp, M + extra).holds


@pytest.mark.parametrize("theta_b, dc, dcp", [(0.0, 0.0, 0.0), (0.5, math.pi, 2.0)])
def test_dc_prime_extremes(theta_b, dc, dcp):
    # delta, alpha chosen with q0 omega = 2 pi, so theta = 2 pi (b - 1)
    from vekua.conditions import dc_prime_quantity, dc_quantity
    p = params(math.sqrt(2), 1.0)
    assert dc_quantity(p, theta_b)[()] == pytest.approx(dc, abs=1e-12)
    assert dc_prime_quantity(p, theta_b)[()] == pytest.approx(dcp, abs=1e-12)


@given(st.floats(0.1, 1.0), st.floats(1.0, 3.0), st.floats(0.5, 3))
def test_dc_prime_equivalence_agrees(p0, delta, M):
    model = circle_model(p0=p0)
    p = params(delta, 0.5 * delta, model=model)
    rep = dc_prime_equivalence(p, Spectrum.from_model(model, (40,)), M)
    assert rep.agree
    assert rep.identity_residual < 1e-13


def test_classify_examples():
    sp = Spectrum.from_model(circle_model(), (5,))
    v = classify_lambda0(params(0.0, 2.0), sp, 50)
    assert (v.case, v.solvable, v.summary) == (1, True, "case 1: solvable")
    v = classify_lambda0(params(2.0, 1.0, s=TrigPoly.constant(1 / TWO_PI)), sp, 50)
    assert (v.case, v.solvable) == (3, True)
    with pytest.raises(HypothesisViolation):
        classify_lambda0(params(1.0, 1.0), sp, 50)


def test_classify_case2_resonant_and_case4():
    sp = Spectrum.from_model(circle_model(), (5,))
    # with s0 = 0, |B0| <= |A0| forces |alpha| <= |delta|, so case 2 needs s0 != 0
    v = classify_lambda0(params(1.0, 1.2, s=TrigPoly.constant(1.0)), sp, 50)
    assert v.case == 2
    assert v.solvable == (len(v.hits) == 0)
    v = classify_lambda0(params(math.sqrt(2), 1.0), sp, 50)
    assert v.case == 4 and not v.solvable and v.hits


@given(st.integers(1, 8))
def test_case1_independent_of_spectrum(L):
    model = GroupModel((GroupFactor.circle(), GroupFactor.su2()), (0, 0), (0.3, 0.7))
    v = classify_lambda0(params(0.5, 2.0, model=model), Spectrum.from_model(model, (L, L / 2)), 50)
    assert (v.case, v.solvable) == (1, True)


def test_case2_resonance_at_balanced_constants():
    # s0 = q0 and |alpha|^2 = delta^2 + 1 give |A0| = |B0|, so k + b = 0 solves both equations
    sp = Spectrum.from_model(circle_model(), (3,))
    v = classify_lambda0(params(1.0, math.sqrt(2), s=ONE), sp, 50)
    assert v.case == 2 and not v.solvable
    assert {h.k for h in v.hits} == {0}
