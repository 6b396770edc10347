"""Spectrum of a normalized left-invariant vector field on a product of
circle and SU(2) factors.

A mode of ``G = G_1 x ... x G_n`` is a tuple with one entry per factor:

* circle factor: ``(k,)`` for the character ``e^{ikx}``;
* SU(2) factor: ``(twoL, twoM, twoN)``, the ``(m, n)`` matrix coefficient of
  the spin-``l`` representation, all half-integers stored doubled.

The symbol of the vector field is diagonal with eigenvalue ``i*mu`` where
``mu = k`` on a circle and ``mu = m`` (the row index) on SU(2).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

ModeIndex = tuple  # tuple of per-factor int tuples


class FactorKind(str, enum.Enum):
    CIRCLE = "circle"
    SU2 = "su2"


@dataclass(frozen=True)
class GroupFactor:
    kind: FactorKind

    @classmethod
    def circle(cls) -> "GroupFactor":
        return cls(FactorKind.CIRCLE)

    @classmethod
    def su2(cls) -> "GroupFactor":
        return cls(FactorKind.SU2)


@dataclass(frozen=True)
class GroupModel:
    """Ordered product of factors together with the per-factor couplings.

    ``lam[j]`` multiplies ``i q(t) X_j`` and ``p0[j]`` is the mean drift of
    ``X_j``.
    """

    factors: tuple
    lam: tuple
    p0: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "lam", tuple(float(x) for x in self.lam))
        object.__setattr__(self, "p0", tuple(float(x) for x in self.p0))
        if not self.factors:
            raise DomainError("group model needs at least one factor")
        if len(self.lam) != len(self.factors) or len(self.p0) != len(self.factors):
            raise DomainError("lambda and p0 must have one entry per factor")
        for x in self.lam + self.p0:
            if not math.isfinite(x):
                raise DomainError("lambda and p0 must be finite")

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def lambda_is_zero(self) -> bool:
        return all(x == 0.0 for x in self.lam)


@dataclass(frozen=True)
class ModeScalars:
    """Per-mode scalars: ``a = lambda . mu``, ``b = p0 . mu``, ``weight = <xi>``."""

    a: float
    b: float
    weight: float


def circle_model(lam: float = 0.0, p0: float = 0.0) -> GroupModel:
    return GroupModel((GroupFactor.circle(),), (lam,), (p0,))


def su2_model(lam: float = 0.0, p0: float = 0.0) -> GroupModel:
    return GroupModel((GroupFactor.su2(),), (lam,), (p0,))


def _two_bound(bound) -> int:
    """Doubled SU(2) truncation; accepts ``l`` as int, float or Fraction."""
    two = Fraction(bound) * 2
    if two.denominator != 1 or two < 0:
        raise DomainError(f"SU(2) truncation must be a nonnegative half-integer, got {bound}")
    return int(two)


def _factor_modes(factor: GroupFactor, bound, with_columns: bool):
    if factor.kind is FactorKind.CIRCLE:
        K = int(bound)
        if K < 0 or K != bound:
            raise DomainError(f"circle truncation must be a nonnegative integer, got {bound}")
        return [(k,) for k in range(-K, K + 1)]
    out = []
    for two_l in range(_two_bound(bound) + 1):
        ms = range(-two_l, two_l + 1, 2)
        if with_columns:
            out.extend((two_l, tm, tn) for tm in ms for tn in ms)
        else:
            out.extend((two_l, tm, -two_l) for tm in ms)
    return out


def enumerate_modes(model: GroupModel, truncation: Sequence) -> list:
    """All admissible modes within per-factor bounds, in lexicographic order.

    ``truncation[j]`` is ``K`` for a circle factor (``|k| <= K``) and ``l``
    for an SU(2) factor (``twoL <= 2l``).
    """
    if len(truncation) != model.n_factors:
        raise DomainError("one truncation bound per factor required")
    per = [_factor_modes(f, b, True) for f, b in zip(model.factors, truncation)]
    return [tuple(m) for m in itertools.product(*per)]


def enumerate_spectrum_modes(model: GroupModel, truncation: Sequence) -> list:
    """Like :func:`enumerate_modes` but with the SU(2) column index pinned to
    ``-l``.  The scalars do not depend on the column, so this is the minimal
    mode set needed by the solvability checks."""
    if len(truncation) != model.n_factors:
        raise DomainError("one truncation bound per factor required")
    per = [_factor_modes(f, b, False) for f, b in zip(model.factors, truncation)]
    return [tuple(m) for m in itertools.product(*per)]


def check_mode(model: GroupModel, mode: ModeIndex) -> None:
    if len(mode) != model.n_factors:
        raise DomainError(f"mode {mode!r} has wrong number of factor entries")
    for factor, entry in zip(model.factors, mode):
        if factor.kind is FactorKind.CIRCLE:
            if len(entry) != 1 or not isinstance(entry[0], (int, np.integer)):
                raise DomainError(f"circle entry must be (k,), got {entry!r}")
        else:
            if len(entry) != 3:
                raise DomainError(f"SU(2) entry must be (twoL, twoM, twoN), got {entry!r}")
            two_l, tm, tn = entry
            if two_l < 0 or abs(tm) > two_l or abs(tn) > two_l:
                raise DomainError(f"SU(2) entry out of range: {entry!r}")
            if (two_l - tm) % 2 or (two_l - tn) % 2:
                raise DomainError(f"SU(2) entry parity mismatch: {entry!r}")


def mode_mu(model: GroupModel, mode: ModeIndex) -> tuple:
    """Per-factor eigenvalues ``mu_j`` as exact Fractions."""
    out = []
    for factor, entry in zip(model.factors, mode):
        if factor.kind is FactorKind.CIRCLE:
            out.append(Fraction(entry[0]))
        else:
            out.append(Fraction(entry[1], 2))
    return tuple(out)


def mode_nu(model: GroupModel, mode: ModeIndex) -> Fraction:
    """Laplacian eigenvalue: ``k^2`` on a circle, ``l(l+1)`` on SU(2)."""
    nu = Fraction(0)
    for factor, entry in zip(model.factors, mode):
        if factor.kind is FactorKind.CIRCLE:
            nu += entry[0] ** 2
        else:
            l = Fraction(entry[0], 2)
            nu += l * (l + 1)
    return nu


def mode_scalars(model: GroupModel, mode: ModeIndex) -> ModeScalars:
    check_mode(model, mode)
    mu = mode_mu(model, mode)
    a = math.fsum(lj * float(m) for lj, m in zip(model.lam, mu))
    b = math.fsum(pj * float(m) for pj, m in zip(model.p0, mu))
    return ModeScalars(a=a, b=b, weight=math.sqrt(1.0 + float(mode_nu(model, mode))))


def spectrum_arrays(model: GroupModel, modes: Iterable) -> tuple:
    """Vectorized ``(a, b, weight, mu)`` arrays for a list of modes.

    Every ``mu`` and ``nu`` is a dyadic rational, so the float arrays are exact.
    """
    modes = list(modes)
    n = len(modes)
    mu = np.zeros((n, model.n_factors))
    nu = np.zeros(n)
    for j, factor in enumerate(model.factors):
        entries = np.array([md[j] for md in modes], dtype=float).reshape(n, -1)
        if factor.kind is FactorKind.CIRCLE:
            mu[:, j] = entries[:, 0]
            nu += entries[:, 0] ** 2
        else:
            mu[:, j] = entries[:, 1] / 2
            nu += entries[:, 0] * (entries[:, 0] + 2) / 4
    a = mu @ np.asarray(model.lam, dtype=float)
    b = mu @ np.asarray(model.p0, dtype=float)
    return a, b, np.sqrt(1.0 + nu), mu


def conjugate_mode(model: GroupModel, mode: ModeIndex) -> tuple:
    """Return ``(mode_bar, phase)`` with ``conj(xi_{nm}) = phase * xibar_{n'm'}``.

    For SU(2) the convention is ``conj(t_{nm}) = (-1)^(m-n) t_{-n,-m}``;
    :func:`verify_conjugation_convention` checks it against explicit matrices.
    """
    check_mode(model, mode)
    out = []
    sign = 0
    for factor, entry in zip(model.factors, mode):
        if factor.kind is FactorKind.CIRCLE:
            out.append((-entry[0],))
        else:
            two_l, tm, tn = entry
            out.append((two_l, -tm, -tn))
            sign += (tm - tn) // 2
    phase = SU2_CONJ_SIGN ** (sign % 2)
    return tuple(out), complex(phase)


# Sign in conj(t_{nm}) = SU2_CONJ_SIGN^(m-n) t_{-n,-m} for the basis built by
# su2_matrix; verify_conjugation_convention() must return True.
SU2_CONJ_SIGN = -1


def su2_element(a: complex, b: complex) -> np.ndarray:
    return np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=complex)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return su2_element(v[0] + 1j * v[1], v[2] + 1j * v[3])


def su2_matrix(two_l: int, g: np.ndarray) -> np.ndarray:
    """Spin-``l`` matrix ``t(g)`` acting on homogeneous polynomials of degree
    ``2l``; row/column ``j`` carries weight ``m = l - j``.

    Only meant for small ``l`` (convention checks), not for synthesis.
    """
    n = two_l
    a, b = g[0, 0], g[0, 1]
    norm = np.array([1.0 / math.sqrt(math.factorial(j) * math.factorial(n - j)) for j in range(n + 1)])
    t = np.zeros((n + 1, n + 1), dtype=complex)
    for j in range(n + 1):
        c = np.array([1.0 + 0j])
        for _ in range(n - j):
            c = np.convolve(c, [a, -np.conj(b)])
        for _ in range(j):
            c = np.convolve(c, [b, np.conj(a)])
        t[:, j] = norm[j] * c / norm
    return t


def su2_coefficient(two_l: int, two_row: int, two_col: int, g: np.ndarray) -> complex:
    t = su2_matrix(two_l, g)
    return t[(two_l - two_row) // 2, (two_l - two_col) // 2]


def verify_conjugation_convention(max_two_l: int = 2, samples: int = 8, seed: int = 0,
                                  atol: float = 1e-12) -> bool:
    """Brute-force check of :func:`conjugate_mode` on explicit SU(2) matrices.

    Checks unitarity, the diagonal symbol ``d/ds t(g exp(sX))|_0 = t(g) diag(i m)``
    and ``conj(t_{nm}) = phase * t_{n'm'}`` for every entry.
    """
    rng = np.random.default_rng(seed)
    model = su2_model()
    for two_l in range(max_two_l + 1):
        ms = list(range(two_l, -two_l - 1, -2))  # row order j = 0..2l
        eps = 1e-6
        for _ in range(samples):
            g = random_su2(rng)
            t = su2_matrix(two_l, g)
            if not np.allclose(t.conj().T @ t, np.eye(two_l + 1), atol=atol * 10):
                return False
            step = su2_element(np.exp(0.5j * eps), 0.0)
            back = su2_element(np.exp(-0.5j * eps), 0.0)
            deriv = (su2_matrix(two_l, g @ step) - su2_matrix(two_l, g @ back)) / (2 * eps)
            symbol = t.conj().T @ deriv
            if not np.allclose(symbol, np.diag([0.5j * m for m in ms]), atol=1e-8):
                return False
            for tn in ms:
                for tm in ms:
                    # conj(xi_{nm}) is the conjugate of the (n, m) entry
                    mode = ((two_l, tm, tn),)
                    (bar,), phase = conjugate_mode(model, mode)
                    _, tm2, tn2 = bar
                    lhs = np.conj(su2_coefficient(two_l, tn, tm, g))
                    rhs = phase * su2_coefficient(two_l, tn2, tm2, g)
                    if abs(lhs - rhs) > atol:
                        return False
    return True
