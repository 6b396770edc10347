import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vekua.errors import ConfigError, NonNegativityError
from vekua.trigpoly import (TWO_PI, CTrigPoly, TrigPoly, antiderivative, check_nonnegative, mean2pi,
                            q_weights)

coef = st.floats(-3, 3, allow_nan=False)


@st.composite
def trigpolys(draw, max_degree=5):
    deg = draw(st.integers(0, max_degree))
    return TrigPoly(draw(coef), tuple((k, draw(coef), draw(coef)) for k in range(1, deg + 1)))


def test_mean2pi_examples():
    assert mean2pi(TrigPoly.constant(1.0)) == pytest.approx(TWO_PI)
    assert mean2pi(TrigPoly.from_coefficients(0.0, {1: 1.0})) == 0.0
    assert mean2pi(TrigPoly.from_coefficients(1.0, {1: 1.0})) == pytest.approx(TWO_PI)


def test_antiderivative_examples():
    F = antiderivative(TrigPoly.constant(1.0))
    assert F.linear_coeff == 1.0 and F.periodic_part.is_zero()
    assert F(TWO_PI) == pytest.approx(TWO_PI)
    G = antiderivative(TrigPoly.from_coefficients(0.0, {1: 1.0}))
    t = np.linspace(0, TWO_PI, 17)
    assert np.allclose(G(t), np.sin(t), atol=1e-15)
    H = antiderivative(TrigPoly.from_coefficients(1.0, {2: 1.0}))
    assert np.allclose(H(t), t + 0.5 * np.sin(2 * t), atol=1e-14)


def test_q_weights_examples():
    Q, Qt, q0 = q_weights(TrigPoly.constant(1.0))
    assert q0 == pytest.approx(TWO_PI)
    assert Q(1.0) == pytest.approx(1.0) and Qt(1.0) == pytest.approx(1.0 - TWO_PI)
    Q, Qt, _ = q_weights(TrigPoly.from_coefficients(1.0, {1: 1.0}))
    assert Q(math.pi) == pytest.approx(math.pi) and Qt(math.pi) == pytest.approx(-math.pi)
    with pytest.raises(NonNegativityError):
        q_weights(TrigPoly.constant(0.0))


def test_nonnegativity_examples():
    assert check_nonnegative(TrigPoly.from_coefficients(1.0, {1: 1.0}))
    bad = check_nonnegative(TrigPoly.from_coefficients(0.0, {1: 1.0}))
    assert not bad and bad.value == pytest.approx(-1.0) and bad.t_star == pytest.approx(math.pi)
    zero = check_nonnegative(TrigPoly.constant(0.0))
    assert not zero and "identically zero" in zero.message
    with pytest.raises(ConfigError):
        check_nonnegative(TrigPoly.from_coefficients(1.0, {40: 0.1}), samples=16)


def test_spec_parsing_round_trip():
    p = TrigPoly.from_spec({"mean": 1.0, "cos": [[1, 0.5]], "sin": [[3, -0.2]]})
    assert TrigPoly.from_spec(p.to_spec()) == p
    assert TrigPoly.from_spec(2) == TrigPoly.constant(2.0)
    for bad in ({"mean": 1, "tan": []}, {"cos": [[0, 1.0]]}, {"cos": [[1, 1.0], [1, 2.0]]}, "x"):
        with pytest.raises(ConfigError):
            TrigPoly.from_spec(bad)


@given(trigpolys())
def test_antiderivative_at_period_is_mean2pi(f):
    F = antiderivative(f)
    assert F(0.0) == pytest.approx(0.0, abs=1e-12)
    assert F(TWO_PI) == pytest.approx(mean2pi(f), abs=1e-11)


@given(trigpolys())
def test_derivative_of_antiderivative(f):
    d = antiderivative(f).derivative()
    t = np.linspace(0, TWO_PI, 33)
    assert np.allclose(d(t), f(t), atol=1e-12)


@given(trigpolys(3))
def test_Q_monotone_for_nonnegative_q(f):
    # shift to make q nonnegative
    t = np.linspace(0, TWO_PI, 4096, endpoint=False)
    q = TrigPoly(f.mean - float(np.min(f(t))) + 1e-9, f.harmonics)
    Q, Qt, q0 = q_weights(q)
    grid = np.linspace(0, TWO_PI, 257)
    assert np.all(np.diff(Q(grid)) >= -1e-12)
    assert np.all(Qt(grid) <= 1e-12)
    assert np.all(q0 + Qt(grid) >= -1e-12)


@given(trigpolys(4))
def test_complex_form_matches_real(f):
    t = np.linspace(0, TWO_PI, 21)
    assert np.allclose(f.to_complex()(t), f(t), atol=1e-12)


def test_ctrigpoly_algebra(rng):
    a, b = CTrigPoly.random(rng, 3), CTrigPoly.random(rng, 5)
    t = np.linspace(0, TWO_PI, 31)
    assert np.allclose((a * b)(t), a(t) * b(t))
    assert np.allclose((a + b)(t), a(t) + b(t))
    assert np.allclose((a - 2.0)(t), a(t) - 2.0)
    assert np.allclose(a.conj()(t), np.conj(a(t)))
    h = 1e-6
    assert np.allclose(a.derivative()(t), (a(t + h) - a(t - h)) / (2 * h), atol=1e-8)
    assert a.sup_bound() >= np.max(np.abs(a(t)))
    with pytest.raises(ConfigError):
        CTrigPoly(np.ones(2))
