"""Trigonometric polynomials on T = R / 2piZ.

:class:`TrigPoly` is the real form used for the operator coefficients
``q, s, p``; :class:`CTrigPoly` is the complex exponential form used for
time profiles of Fourier coefficients.  Both differentiate and integrate
exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError, NonNegativityError

TWO_PI = 2.0 * math.pi
TOL_NONNEG = 1e-12


@dataclass(frozen=True)
class TrigPoly:
    """``mean + sum_k (c_k cos(k t) + s_k sin(k t))`` with real coefficients."""

    mean: float = 0.0
    harmonics: tuple = ()

    def __post_init__(self):
        harm = tuple((int(k), float(c), float(s)) for k, c, s in self.harmonics)
        freqs = [k for k, _, _ in harm]
        if any(k < 1 for k in freqs) or any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ConfigError("harmonic frequencies must be >= 1 and strictly increasing")
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "harmonics", harm)

    @classmethod
    def constant(cls, value: float) -> "TrigPoly":
        return cls(value, ())

    @classmethod
    def from_coefficients(cls, mean: float, cos: Mapping = None, sin: Mapping = None) -> "TrigPoly":
        cos = dict(cos or {})
        sin = dict(sin or {})
        freqs = sorted(set(cos) | set(sin))
        return cls(mean, tuple((k, cos.get(k, 0.0), sin.get(k, 0.0)) for k in freqs))

    @classmethod
    def from_spec(cls, spec) -> "TrigPoly":
        """Parse ``{mean: x, cos: [[k, c], ...], sin: [[k, s], ...]}`` or a bare number."""
        if isinstance(spec, (int, float)):
            return cls.constant(float(spec))
        if not isinstance(spec, Mapping):
            raise ConfigError(f"trig polynomial spec must be a number or mapping, got {type(spec).__name__}")
        unknown = set(spec) - {"mean", "cos", "sin"}
        if unknown:
            raise ConfigError(f"unknown trig polynomial keys {sorted(unknown)}")
        parts = {}
        for key in ("cos", "sin"):
            entries = {}
            for item in spec.get(key, []) or []:
                if len(item) != 2:
                    raise ConfigError(f"{key} entries must be [freq, coeff] pairs")
                k, c = item
                if int(k) != k or k < 1:
                    raise ConfigError(f"{key} frequency must be a positive integer, got {k}")
                if int(k) in entries:
                    raise ConfigError(f"duplicate {key} frequency {k}")
                entries[int(k)] = float(c)
            parts[key] = entries
        mean = float(spec.get("mean", 0.0))
        values = [mean, *parts["cos"].values(), *parts["sin"].values()]
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("trig polynomial coefficients must be finite")
        return cls.from_coefficients(mean, parts["cos"], parts["sin"])

    def to_spec(self) -> dict:
        return {
            "mean": self.mean,
            "cos": [[k, c] for k, c, _ in self.harmonics if c != 0.0],
            "sin": [[k, s] for k, _, s in self.harmonics if s != 0.0],
        }

    @property
    def degree(self) -> int:
        return self.harmonics[-1][0] if self.harmonics else 0

    def is_zero(self) -> bool:
        return self.mean == 0.0 and all(c == 0.0 and s == 0.0 for _, c, s in self.harmonics)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.mean)
        for k, c, s in self.harmonics:
            out = out + c * np.cos(k * t) + s * np.sin(k * t)
        return out

    def derivative(self) -> "TrigPoly":
        return TrigPoly(0.0, tuple((k, k * s, -k * c) for k, c, s in self.harmonics))

    def scaled(self, factor: float) -> "TrigPoly":
        return TrigPoly(self.mean * factor, tuple((k, c * factor, s * factor) for k, c, s in self.harmonics))

    def to_complex(self) -> "CTrigPoly":
        K = self.degree
        coef = np.zeros(2 * K + 1, dtype=complex)
        coef[K] = self.mean
        for k, c, s in self.harmonics:
            coef[K + k] += 0.5 * (c - 1j * s)
            coef[K - k] += 0.5 * (c + 1j * s)
        return CTrigPoly(coef)


@dataclass(frozen=True)
class SplitAntiderivative:
    """``F(t) = linear_coeff * t + periodic_part(t)`` with ``F(0) = 0``."""

    linear_coeff: float
    periodic_part: TrigPoly

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.linear_coeff * t + self.periodic_part(t)

    def derivative(self) -> TrigPoly:
        d = self.periodic_part.derivative()
        return TrigPoly(self.linear_coeff, d.harmonics)


def mean2pi(f: TrigPoly) -> float:
    """Integral of ``f`` over one period."""
    return TWO_PI * f.mean


def antiderivative(f: TrigPoly) -> SplitAntiderivative:
    harm = tuple((k, -s / k, c / k) for k, c, s in f.harmonics)
    offset = -math.fsum(c for _, c, _ in harm)
    return SplitAntiderivative(f.mean, TrigPoly(offset, harm))


@dataclass(frozen=True)
class NonnegCheck:
    passed: bool
    t_star: float | None = None
    value: float | None = None
    message: str = ""

    def __bool__(self):
        return self.passed


def check_nonnegative(q: TrigPoly, samples: int = 4096, tol: float = TOL_NONNEG) -> NonnegCheck:
    """Sample ``q`` on an equispaced grid; fail with the minimizer as witness."""
    if samples < 4 * (q.degree + 1):
        raise ConfigError(f"need at least {4 * (q.degree + 1)} samples for degree {q.degree}")
    if q.is_zero():
        return NonnegCheck(False, None, 0.0, "q identically zero")
    t = np.arange(samples) * (TWO_PI / samples)
    v = q(t)
    j = int(np.argmin(v))
    if v[j] < -tol:
        return NonnegCheck(False, float(t[j]), float(v[j]),
                           f"q changes sign: q({t[j]:.6g}) = {v[j]:.6g}")
    return NonnegCheck(True, float(t[j]), float(v[j]), "")


def q_weights(q: TrigPoly, samples: int = 4096):
    """Return ``(Q, Qtilde, q0)`` with ``Q(t) = int_0^t q`` and ``Qtilde = Q - q0``."""
    check = check_nonnegative(q, max(samples, 4 * (q.degree + 1)))
    if not check:
        raise NonNegativityError(check.message, check.t_star, check.value)
    Q = antiderivative(q)
    q0 = mean2pi(q)

    def Qtilde(t):
        return Q(t) - q0

    return Q, Qtilde, q0


@dataclass(frozen=True, eq=False)
class CTrigPoly:
    """Complex trig polynomial ``sum_{|k|<=K} coef[K+k] e^{ikt}``."""

    coef: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coef, dtype=complex))
        if c.ndim != 1 or c.size % 2 == 0:
            raise ConfigError("complex trig polynomial needs an odd-length coefficient vector")
        object.__setattr__(self, "coef", c)

    @classmethod
    def zero(cls) -> "CTrigPoly":
        return cls(np.zeros(1, dtype=complex))

    @classmethod
    def constant(cls, value: complex) -> "CTrigPoly":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def from_real_imag(cls, re: TrigPoly, im: TrigPoly) -> "CTrigPoly":
        return re.to_complex() + im.to_complex() * 1j

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, scale: float = 1.0) -> "CTrigPoly":
        n = 2 * degree + 1
        return cls(scale * (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2 * n))

    @property
    def degree(self) -> int:
        return (self.coef.size - 1) // 2

    def padded(self, degree: int) -> np.ndarray:
        K = self.degree
        if degree < K:
            raise ValueError("cannot pad to a smaller degree")
        out = np.zeros(2 * degree + 1, dtype=complex)
        out[degree - K:degree + K + 1] = self.coef
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        K = self.degree
        k = np.arange(-K, K + 1)
        return np.exp(1j * np.multiply.outer(t, k)) @ self.coef

    def __add__(self, other):
        if not isinstance(other, CTrigPoly):
            other = CTrigPoly.constant(other)
        d = max(self.degree, other.degree)
        return CTrigPoly(self.padded(d) + other.padded(d))

    __radd__ = __add__

    def __neg__(self):
        return CTrigPoly(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            other = other.to_complex()
        if isinstance(other, CTrigPoly):
            return CTrigPoly(np.convolve(self.coef, other.coef))
        return CTrigPoly(self.coef * complex(other))

    __rmul__ = __mul__

    def conj(self) -> "CTrigPoly":
        """Coefficients of the pointwise complex conjugate."""
        return CTrigPoly(np.conj(self.coef[::-1]))

    def derivative(self, order: int = 1) -> "CTrigPoly":
        K = self.degree
        k = np.arange(-K, K + 1)
        return CTrigPoly(self.coef * (1j * k) ** order)

    def sup_bound(self) -> float:
        return float(np.abs(self.coef).sum())

    def max_abs_diff(self, other: "CTrigPoly") -> float:
        d = max(self.degree, other.degree)
        return float(np.max(np.abs(self.padded(d) - other.padded(d))))
