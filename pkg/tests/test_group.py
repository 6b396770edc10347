import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vekua.errors import DomainError
from vekua.group import (GroupFactor, GroupModel, ModeScalars, check_mode, circle_model, conjugate_mode,
                         enumerate_modes, enumerate_spectrum_modes, mode_mu, mode_scalars, random_su2,
                         spectrum_arrays, su2_coefficient, su2_matrix, su2_model,
                         verify_conjugation_convention)


def test_circle_enumeration():
    assert enumerate_modes(circle_model(), (1,)) == [((-1,),), ((0,),), ((1,),)]


def test_su2_half_enumeration_counts_matrix_entries():
    modes = enumerate_modes(su2_model(), (Fraction(1, 2),))
    assert len(modes) == 5
    assert sum(1 for m in modes if m[0][0] == 1) == 4


def test_product_enumeration():
    model = GroupModel((GroupFactor.circle(), GroupFactor.su2()), (0, 0), (0, 0))
    modes = enumerate_modes(model, (0, 0.5))
    assert len(modes) == 5
    assert all(m[0] == (0,) for m in modes)


def test_su2_bound_must_be_half_integer():
    with pytest.raises(DomainError):
        enumerate_modes(su2_model(), (0.3,))


@pytest.mark.parametrize("mode", [((1, 0, 1),), ((1, 3, 1),), ((-1, 0, 0),), ((2, 1, 0),)])
def test_check_mode_rejects(mode):
    with pytest.raises(DomainError):
        check_mode(su2_model(), mode)


def test_model_validation():
    with pytest.raises(DomainError):
        GroupModel((), (), ())
    with pytest.raises(DomainError):
        GroupModel((GroupFactor.circle(),), (1.0, 2.0), (0.0,))


def test_scalars_circle():
    s = mode_scalars(circle_model(lam=2, p0=3), ((1,),))
    assert (s.a, s.b) == (2, 3)
    assert s.weight == pytest.approx(math.sqrt(2))


def test_scalars_su2():
    s = mode_scalars(su2_model(lam=1, p0=0), ((1, -1, 1),))
    assert mode_mu(su2_model(), ((1, -1, 1),)) == (Fraction(-1, 2),)
    assert s == ModeScalars(-0.5, 0.0, math.sqrt(1.75))


def test_scalars_zero_mu():
    s = mode_scalars(su2_model(lam=1.3, p0=0.4), ((2, 0, 2),))
    assert s.a == 0 and s.b == 0


def test_conjugate_examples():
    assert conjugate_mode(circle_model(), ((3,),)) == (((-3,),), 1)
    assert conjugate_mode(su2_model(), ((0, 0, 0),)) == (((0, 0, 0),), 1)
    mbar, phase = conjugate_mode(su2_model(), ((1, 1, -1),))
    assert mbar == ((1, -1, 1),)
    assert phase == -1


def test_conjugation_convention_matches_matrices():
    assert verify_conjugation_convention(max_two_l=4, samples=6)


def test_su2_matrix_is_unitary_homomorphism(rng):
    g, h = random_su2(rng), random_su2(rng)
    for two_l in range(5):
        U = su2_matrix(two_l, g)
        assert np.allclose(U @ U.conj().T, np.eye(two_l + 1), atol=1e-12)
        assert np.allclose(su2_matrix(two_l, g @ h), U @ su2_matrix(two_l, h), atol=1e-12)


def test_spin_half_coefficients_brute_force(rng):
    # conj(t_nm) = (-1)^(m-n) t_{-n,-m} on the explicit 2x2 matrices
    g = random_su2(rng)
    for tm in (-1, 1):
        for tn in (-1, 1):
            lhs = np.conj(su2_coefficient(1, tm, tn, g))
            rhs = (-1) ** ((tm - tn) // 2) * su2_coefficient(1, -tm, -tn, g)
            assert lhs == pytest.approx(rhs, abs=1e-14)


mixed = GroupModel((GroupFactor.circle(), GroupFactor.su2(), GroupFactor.su2()),
                   (0.4, -1.2, 0.0), (1.5, 0.25, -0.7))
MIXED_MODES = enumerate_modes(mixed, (2, 1, 0.5))


@given(st.sampled_from(MIXED_MODES))
def test_conjugation_involution(mode):
    mbar, p1 = conjugate_mode(mixed, mode)
    back, p2 = conjugate_mode(mixed, mbar)
    assert back == mode
    assert p1 * p2 == 1
    s, sb = mode_scalars(mixed, mode), mode_scalars(mixed, mbar)
    assert (sb.a, sb.b) == (-s.a, -s.b)
    assert sb.weight == s.weight


@given(st.sampled_from(MIXED_MODES))
def test_scalar_bounds(mode):
    s = mode_scalars(mixed, mode)
    assert s.weight >= 1
    assert all(abs(float(m)) <= s.weight for m in mode_mu(mixed, mode))
    assert abs(s.a) <= sum(map(abs, mixed.lam)) * s.weight + 1e-12
    assert abs(s.b) <= sum(map(abs, mixed.p0)) * s.weight + 1e-12


def test_mu_spectrum_symmetric():
    mus = {mode_mu(mixed, m) for m in MIXED_MODES}
    assert mus == {tuple(-x for x in mu) for mu in mus}


def test_spectrum_arrays_match_scalars():
    a, b, w, _ = spectrum_arrays(mixed, MIXED_MODES)
    ref = np.array([[s.a, s.b, s.weight] for s in (mode_scalars(mixed, m) for m in MIXED_MODES)])
    assert np.allclose(np.c_[a, b, w], ref, rtol=0, atol=1e-14)


def test_spectrum_modes_pin_column():
    modes = enumerate_spectrum_modes(su2_model(), (1,))
    assert all(m[0][2] == -m[0][0] for m in modes)
    assert len(modes) == 1 + 2 + 3
