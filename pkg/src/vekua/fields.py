"""Coefficient fields and the global solve.

A field maps modes to time profiles.  A profile is either a
:class:`~vekua.trigpoly.CTrigPoly` (exact arithmetic) or an array of
``n_t + 1`` complex samples on the equispaced grid of ``[0, 2 pi]``.
Solutions always come back sampled.

The paired field carries ``u_hat`` (``primal``) and the coefficients of
``conj(u)`` (``conj``) side by side, since the operator couples the two.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DegenerateRho, DomainError, ResonantMode, TruncationAsymmetry
from .group import (GroupModel, check_mode, conjugate_mode, mode_mu, mode_nu,
                    spectrum_arrays)
from .modes import (TOL_DEGENERATE, SolverGrid, VekuaParams, auto_nt, profiles_on_grid, rho_branch,
                    solve_batch, t_inverse, t_matrix, tol_res, twist_factor)
from .trigpoly import TWO_PI, CTrigPoly, TrigPoly, antiderivative

TOL_PAIRING = 1e-12
FIELD_FORMAT = "vekua-field/1"


@functools.lru_cache(maxsize=64)
def _grid_basis(n_t: int, degree: int) -> np.ndarray:
    t = np.linspace(0.0, TWO_PI, n_t + 1)
    return np.exp(1j * np.multiply.outer(t, np.arange(-degree, degree + 1)))


def is_sampled(profile) -> bool:
    return not isinstance(profile, CTrigPoly)


def _sort_key(mode):
    return tuple(x for entry in mode for x in entry)


@dataclass(eq=False)
class CoefficientField:
    """Mode-indexed time profiles.

    ``support`` is the set of admissible keys (``None`` means every mode of
    the group); conjugation must map it into itself.
    """

    model: GroupModel
    profiles: dict
    n_t: int | None = None
    support: frozenset | None = None

    def __post_init__(self):
        clean = {}
        n_samples = None
        for mode, prof in self.profiles.items():
            mode = tuple(tuple(int(x) for x in entry) for entry in mode)
            check_mode(self.model, mode)
            if self.support is not None and mode not in self.support:
                raise DomainError(f"mode {mode} outside the field's support")
            if is_sampled(prof):
                prof = np.asarray(prof, dtype=complex)
                if prof.ndim != 1:
                    raise ConfigError("sampled profile must be one-dimensional")
                if n_samples is None:
                    n_samples = prof.size
                elif prof.size != n_samples:
                    raise ConfigError("sampled profiles must share one grid size")
            clean[mode] = prof
        self.profiles = dict(sorted(clean.items(), key=lambda kv: _sort_key(kv[0])))
        if n_samples is not None:
            if self.n_t is not None and self.n_t + 1 != n_samples:
                raise ConfigError(f"samples have {n_samples} points but n_t = {self.n_t}")
            self.n_t = n_samples - 1

    @classmethod
    def from_truncation(cls, model: GroupModel, profiles: Mapping, truncation: Sequence, n_t=None):
        from .group import enumerate_modes
        return cls(model, dict(profiles), n_t, frozenset(enumerate_modes(model, truncation)))

    def modes(self) -> list:
        return list(self.profiles)

    def __len__(self):
        return len(self.profiles)

    def get(self, mode):
        return self.profiles.get(mode)

    def is_sampled(self) -> bool:
        return any(is_sampled(p) for p in self.profiles.values())

    def samples(self, mode, n_t: int) -> np.ndarray:
        """Profile values on the ``n_t + 1`` grid (zeros for absent modes)."""
        prof = self.profiles.get(mode)
        if prof is None:
            return np.zeros(n_t + 1, dtype=complex)
        if is_sampled(prof):
            if prof.size == n_t + 1:
                return prof
            return resample(prof, n_t)
        return _grid_basis(n_t, prof.degree) @ prof.coef

    def map(self, fn) -> "CoefficientField":
        return CoefficientField(self.model, {m: fn(m, p) for m, p in self.profiles.items()},
                                None, self.support)

    def scaled(self, c: float) -> "CoefficientField":
        return self.map(lambda m, p: p * c)

    def fitted(self, degree: int | None = None) -> "CoefficientField":
        """Trig-polynomial least-squares fit of every sampled profile."""
        return self.map(lambda m, p: fit_trigpoly(p, degree) if is_sampled(p) else p)

    def max_abs_diff(self, other: "CoefficientField", n_t: int) -> float:
        out = 0.0
        for mode in set(self.profiles) | set(other.profiles):
            out = max(out, float(np.max(np.abs(self.samples(mode, n_t) - other.samples(mode, n_t)))))
        return out


@dataclass(eq=False)
class PairedField:
    """``primal`` holds ``f_hat``, ``conj`` holds the coefficients of ``conj(f)``."""

    primal: CoefficientField
    conj: CoefficientField

    @classmethod
    def from_primal(cls, primal: CoefficientField) -> "PairedField":
        return cls(primal, conjugate_field(primal))

    @property
    def model(self) -> GroupModel:
        return self.primal.model

    @property
    def n_t(self):
        return self.primal.n_t if self.primal.n_t is not None else self.conj.n_t

    def modes(self) -> list:
        return sorted(set(self.primal.profiles) | set(self.conj.profiles), key=_sort_key)

    def pairing_residual(self, n_t: int | None = None) -> float:
        """``max |conj[m] - phase * conj(primal[m_bar])|`` over modes."""
        return pairing_residual(self.primal, self.conj, n_t)

    def map(self, fn) -> "PairedField":
        return PairedField(self.primal.map(fn), self.conj.map(fn))

    def combine(self, other: "PairedField", c1: float, c2: float, n_t: int | None = None) -> "PairedField":
        """Real linear combination ``c1 * self + c2 * other`` (sampled)."""
        n_t = n_t or self.n_t or other.n_t or 256
        def lin(f, g):
            modes = set(f.profiles) | set(g.profiles)
            return CoefficientField(f.model, {m: c1 * f.samples(m, n_t) + c2 * g.samples(m, n_t) for m in modes})
        return PairedField(lin(self.primal, other.primal), lin(self.conj, other.conj))


# --------------------------------------------------------------------------- conjugation

def _conj_profile(p):
    return p.conj() if isinstance(p, CTrigPoly) else np.conj(p)


def conjugate_field(f: CoefficientField) -> CoefficientField:
    """Coefficient field of the complex-conjugate function.

    ``conj(f)^(m) = phase * conj(f^(m_bar))`` with ``(m_bar, phase)`` from
    :func:`~vekua.group.conjugate_mode`.
    """
    out = {}
    for mode, prof in f.profiles.items():
        mbar, phase = conjugate_mode(f.model, mode)
        if f.support is not None and mbar not in f.support:
            raise TruncationAsymmetry(f"conjugate of mode {mode} is {mbar}, outside the truncation")
        out[mbar] = _conj_profile(prof) * phase
    return CoefficientField(f.model, out, f.n_t, f.support)


def pairing_residual(primal: CoefficientField, conj: CoefficientField, n_t: int | None = None) -> float:
    n_t = n_t or primal.n_t or conj.n_t or 64
    expected = conjugate_field(CoefficientField(primal.model, primal.profiles, primal.n_t))
    res = 0.0
    for mode in set(expected.profiles) | set(conj.profiles):
        res = max(res, float(np.max(np.abs(expected.samples(mode, n_t) - conj.samples(mode, n_t)))))
    return res


# --------------------------------------------------------------------------- sampled calculus

def spectral_derivative(samples: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative of periodic samples (last axis has ``N + 1`` points, endpoint included)."""
    v = np.asarray(samples, dtype=complex)[..., :-1]
    N = v.shape[-1]
    k = np.fft.fftfreq(N, d=1.0 / N)
    mult = (1j * k) ** order
    if N % 2 == 0 and order % 2:
        mult[N // 2] = 0.0
    d = np.fft.ifft(np.fft.fft(v, axis=-1) * mult, axis=-1)
    return np.concatenate([d, d[..., :1]], axis=-1)


def resample(samples: np.ndarray, n_t: int) -> np.ndarray:
    """Trigonometric interpolation of ``N + 1`` periodic samples onto ``n_t + 1`` points."""
    from .modes import _profile_at
    s = np.asarray(samples, dtype=complex)
    N = s.size - 1
    if n_t % N == 0:
        return _profile_at(s, np.linspace(0.0, TWO_PI, n_t + 1))
    return fit_trigpoly(s)(np.linspace(0.0, TWO_PI, n_t + 1))


def fit_trigpoly(samples: np.ndarray, degree: int | None = None) -> CTrigPoly:
    """Least-squares trig polynomial of ``degree`` (default ``N/2 - 1``) through periodic samples."""
    v = np.asarray(samples, dtype=complex)[:-1]
    N = v.size
    K = N // 2 - 1 if degree is None else int(degree)
    if K < 0 or 2 * K + 1 > N:
        raise ConfigError(f"cannot fit degree {K} to {N} samples")
    c = np.fft.fft(v) / N
    coef = np.concatenate([c[N - K:], c[:K + 1]]) if K else c[:1]
    return CTrigPoly(coef)


def trig_sup(p: CTrigPoly, oversample: int = 16) -> float:
    n = max(64, oversample * (2 * p.degree + 1))
    return float(np.max(np.abs(p(np.arange(n) * (TWO_PI / n)))))


# --------------------------------------------------------------------------- normal form

def drift_phase(model: GroupModel, drift: Sequence[TrigPoly]):
    """Per-factor ``P_j(t) = int_0^t p_j - p0_j t`` (periodic trig polynomials)."""
    if len(drift) != model.n_factors:
        raise ConfigError("drift needs one trig polynomial per factor")
    out = []
    for p, p0 in zip(drift, model.p0):
        if not math.isclose(p.mean, p0, rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigError(f"drift mean {p.mean:g} does not match p0 = {p0:g}")
        out.append(antiderivative(p).periodic_part)
    return out


def psi_multiplier(model: GroupModel, drift, mode, t: np.ndarray, direction: str = "forward") -> np.ndarray:
    """``exp(-/+ i sum_j mu_j P_j(t))`` for ``direction`` forward/inverse."""
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    phases = drift_phase(model, drift)
    mu = [float(m) for m in mode_mu(model, mode)]
    arg = sum(m * P(t) for m, P in zip(mu, phases)) if any(mu) else np.zeros_like(t)
    sign = -1.0 if direction == "forward" else 1.0
    return np.exp(sign * 1j * arg)


def psi_conjugation(f: CoefficientField, drift: Sequence[TrigPoly], direction: str = "forward",
                    n_t: int | None = None) -> CoefficientField:
    """Normal-form conjugation ``Psi``: each mode times ``exp(-/+ i mu . P(t))``.

    ``Psi`` intertwines ``d/dt - sum_j p_j(t) X_j`` with ``d/dt - sum_j p0_j X_j``.
    The output is sampled on ``n_t + 1`` points; modes with ``mu = 0`` and
    constant drift pass through unchanged.
    """
    n_t = n_t or f.n_t or 256
    t = np.linspace(0.0, TWO_PI, n_t + 1)
    phases = drift_phase(f.model, drift)
    trivial = all(P.is_zero() for P in phases)
    out = {}
    for mode, prof in f.profiles.items():
        if trivial or not any(mode_mu(f.model, mode)):
            out[mode] = prof
        else:
            out[mode] = f.samples(mode, n_t) * psi_multiplier(f.model, drift, mode, t, direction)
    return CoefficientField(f.model, out, None, f.support)


def psi_paired(u: PairedField, drift, direction="forward", n_t=None) -> PairedField:
    # the multiplier for conj(u) at mode m equals the one for u at m, since mu(m_bar) = -mu(m)
    return PairedField(psi_conjugation(u.primal, drift, direction, n_t),
                       psi_conjugation(u.conj, drift, direction, n_t))


def apply_L(f: CoefficientField, drift: Sequence[TrigPoly] | None = None, n_t: int | None = None) -> CoefficientField:
    """``d/dt - sum_j p_j(t) X_j`` in coefficient space (``X_j -> i mu_j``).

    With ``drift=None`` the constants ``p0_j`` are used.
    """
    model = f.model
    drift = list(drift) if drift is not None else [TrigPoly.constant(p) for p in model.p0]
    out = {}
    for mode, prof in f.profiles.items():
        mu = [float(m) for m in mode_mu(model, mode)]
        if is_sampled(prof):
            t = np.linspace(0.0, TWO_PI, prof.size)
            coef = sum(m * p(t) for m, p in zip(mu, drift))
            out[mode] = spectral_derivative(prof) - 1j * coef * prof
        else:
            coef = CTrigPoly.zero()
            for m, p in zip(mu, drift):
                if m:
                    coef = coef + p.to_complex() * m
            out[mode] = prof.derivative() - prof * coef * 1j
    return CoefficientField(model, out, None, f.support)


# --------------------------------------------------------------------------- operator

def apply_P(params: VekuaParams, u: PairedField, drift: Sequence[TrigPoly] | None = None) -> PairedField:
    """Apply the operator mode by mode.

    ``f_hat = u_hat' - ((p + i lam q) i mu + s + i delta q) u_hat - alpha q g_hat``
    and the conjugate equation for ``g_hat``.  Exact for trig-polynomial
    profiles, spectral differentiation for sampled ones.  ``drift`` replaces
    the constant ``p0`` by per-factor trig polynomials.
    """
    model = params.group
    drift = list(drift) if drift is not None else None
    if drift is not None:
        drift_phase(model, drift)
    modes = u.modes()
    s_c, q_c = params.s.to_complex(), params.q.to_complex()
    alpha = params.alpha
    out1, out2 = {}, {}
    n_t = u.n_t
    for mode in modes:
        mu = [float(m) for m in mode_mu(model, mode)]
        a = math.fsum(l * m for l, m in zip(model.lam, mu))
        p1, p2 = u.primal.get(mode), u.conj.get(mode)
        exact = not (p1 is not None and is_sampled(p1)) and not (p2 is not None and is_sampled(p2))
        if exact:
            p1 = p1 if p1 is not None else CTrigPoly.zero()
            p2 = p2 if p2 is not None else CTrigPoly.zero()
            if drift is None:
                bterm = CTrigPoly.constant(1j * math.fsum(p * m for p, m in zip(model.p0, mu)))
            else:
                bterm = CTrigPoly.zero()
                for m, p in zip(mu, drift):
                    if m:
                        bterm = bterm + p.to_complex() * (1j * m)
            c1 = bterm + s_c + q_c * (1j * params.delta - a)
            c2 = bterm + s_c + q_c * (a - 1j * params.delta)
            out1[mode] = p1.derivative() - c1 * p1 - q_c * p2 * alpha
            out2[mode] = p2.derivative() - c2 * p2 - q_c * p1 * np.conj(alpha)
        else:
            v1 = u.primal.samples(mode, n_t)
            v2 = u.conj.samples(mode, n_t)
            t = np.linspace(0.0, TWO_PI, n_t + 1)
            if drift is None:
                bterm = 1j * math.fsum(p * m for p, m in zip(model.p0, mu))
            else:
                bterm = 1j * sum(m * p(t) for m, p in zip(mu, drift))
            st, qt = params.s(t), params.q(t)
            c1 = bterm + st + (1j * params.delta - a) * qt
            c2 = bterm + st + (a - 1j * params.delta) * qt
            out1[mode] = spectral_derivative(v1) - c1 * v1 - alpha * qt * v2
            out2[mode] = spectral_derivative(v2) - c2 * v2 - np.conj(alpha) * qt * v1
    return PairedField(CoefficientField(model, out1, None, u.primal.support),
                       CoefficientField(model, out2, None, u.conj.support))


# --------------------------------------------------------------------------- solve

@dataclass
class ModeRecord:
    mode: tuple
    weight: float
    a: float
    b: float
    rho: complex
    D1: complex
    D2: complex


@dataclass
class SolveReport:
    solution: PairedField
    n_t: int
    residual_max: float
    residual_l2: float
    pairing_residual: float
    periodicity_residual: float
    max_exp_real: float
    twist_residual: float
    modes: list                  # ModeRecord, sorted by mode index
    decay: "DecayReport"
    resonant: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_t": self.n_t,
            "n_modes": len(self.modes),
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
            "pairing_residual": self.pairing_residual,
            "periodicity_residual": self.periodicity_residual,
            "max_exp_real": self.max_exp_real,
            "twist_residual": self.twist_residual,
            "resonant": [list(map(list, m)) for m in self.resonant],
            "denominators": [
                {"mode": [list(e) for e in r.mode], "weight": r.weight, "a": r.a, "b": r.b,
                 "rho": [r.rho.real, r.rho.imag], "abs_D1": abs(r.D1), "abs_D2": abs(r.D2)}
                for r in self.modes
            ],
            "decay": self.decay.to_dict(),
        }


def _mode_arrays(params: VekuaParams, modes):
    a, b, weight, _ = spectrum_arrays(params.group, modes)
    rho = np.atleast_1d(rho_branch(a, params.delta, params.alpha))
    E = twist_factor(b, params.s0)
    decay = np.exp(-rho * params.q0)
    return a, b, weight, rho, E, decay - E, 1.0 - decay * E


def mode_denominators(params: VekuaParams, modes) -> list:
    a, b, w, rho, _, D1, D2 = _mode_arrays(params, modes)
    return [ModeRecord(m, float(w[i]), float(a[i]), float(b[i]), complex(rho[i]), complex(D1[i]), complex(D2[i]))
            for i, m in enumerate(modes)]


def solve_field(params: VekuaParams, f: PairedField | CoefficientField, n_t: int | None = None,
                drift: Sequence[TrigPoly] | None = None, backend=None, workers: int | None = None,
                check_pairing: bool = True, pairing_tol: float = TOL_PAIRING) -> SolveReport:
    """Solve ``Pu = f`` mode by mode and report residual and decay diagnostics.

    A bare :class:`CoefficientField` is paired with its conjugate first.  With
    ``drift`` the solve runs on the normal form: ``u = Psi^-1 solve0(Psi f)``.
    Any resonant mode aborts with :class:`ResonantMode`.
    """
    if isinstance(f, CoefficientField):
        f = PairedField.from_primal(f)
    model = params.group
    if f.n_t is not None:
        if n_t is not None and n_t != f.n_t:
            raise ConfigError(f"forcing is sampled with n_t = {f.n_t}, solve requested n_t = {n_t}")
        n_t = f.n_t
    if check_pairing:
        scale = max(1.0, _field_scale(f, n_t or 64))
        res = f.pairing_residual(n_t)
        if res > pairing_tol * scale:
            raise ConfigError(f"forcing is not conjugation-consistent (pairing residual {res:.3e})")

    modes = f.modes()
    if not modes:
        raise ConfigError("forcing field has no modes")
    a, b, weight, rho, E, D1, D2 = _mode_arrays(params, modes)
    scale = 1.0 + np.abs(a) + abs(params.delta) + abs(params.alpha)
    degenerate = np.flatnonzero(np.abs(rho) ** 2 <= TOL_DEGENERATE * scale ** 2)
    if degenerate.size:
        raise DegenerateRho(f"rho = 0 at mode {modes[degenerate[0]]} (|alpha| = |delta| with a = 0)")
    records = [ModeRecord(m, float(weight[i]), float(a[i]), float(b[i]), complex(rho[i]), complex(D1[i]), complex(D2[i]))
               for i, m in enumerate(modes)]
    resonant = np.flatnonzero(np.minimum(np.abs(D1), np.abs(D2)) < tol_res(params.s0))
    if resonant.size:
        i = int(resonant[0])
        raise ResonantMode(f"resonant mode {modes[i]}: |D1|={abs(D1[i]):.3e}, |D2|={abs(D2[i]):.3e}",
                           mode=modes[i], d1=complex(D1[i]), d2=complex(D2[i]))

    if n_t is None:
        n_t = auto_nt(params, float(np.max(np.abs(b))), float(np.max(np.abs(rho))))
    grid = SolverGrid(params, n_t)
    forcing = f if drift is None else psi_paired(f, drift, "forward", n_t)

    T = np.stack([t_matrix(a[i], params.delta, params.alpha, rho[i]) for i in range(len(modes))])
    Tinv = np.stack([t_inverse(a[i], params.delta, params.alpha, rho[i]) for i in range(len(modes))])
    zero = CTrigPoly.zero()

    def run(idx):
        prim = [_grid_profile(forcing.primal, modes[i], n_t, zero) for i in idx]
        conj = [_grid_profile(forcing.conj, modes[i], n_t, zero) for i in idx]
        _, F1 = profiles_on_grid(prim, grid)
        _, F2 = profiles_on_grid(conj, grid)
        Ti = Tinv[idx]
        G1 = Ti[:, 0, 0, None, None] * F1 + Ti[:, 0, 1, None, None] * F2
        G2 = Ti[:, 1, 0, None, None] * F1 + Ti[:, 1, 1, None, None] * F2
        return solve_batch(rho[idx], b[idx], E[idx], D1[idx], D2[idx], T[idx], G1, G2, grid, backend)

    chunks = _chunks(len(modes), workers)
    if workers and workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(idx) for idx in chunks]
    w1 = np.concatenate([p.w1 for p in parts])
    w2 = np.concatenate([p.w2 for p in parts])
    max_exp_real = max(p.max_exp_real for p in parts)
    twist = float(max(np.max(p.twist_residual) for p in parts))

    sol = PairedField(CoefficientField(model, {m: w1[i] for i, m in enumerate(modes)}, n_t, f.primal.support),
                      CoefficientField(model, {m: w2[i] for i, m in enumerate(modes)}, n_t, f.conj.support))
    if drift is not None:
        sol = psi_paired(sol, drift, "inverse", n_t)

    back = apply_P(params, sol, drift)
    r = np.stack([np.concatenate([back.primal.samples(m, n_t) - f.primal.samples(m, n_t),
                                  back.conj.samples(m, n_t) - f.conj.samples(m, n_t)]) for m in modes])
    residual_max = float(np.max(np.abs(r)))
    residual_l2 = float(np.sqrt(np.sum(np.mean(np.abs(r[:, :-1]) ** 2, axis=1))))
    periodicity = float(max(np.max(np.abs(w1[:, 0] - w1[:, -1])), np.max(np.abs(w2[:, 0] - w2[:, -1]))))
    pair_res = sol.pairing_residual(n_t) if _closed(modes, model) else float("nan")
    return SolveReport(sol, n_t, residual_max, residual_l2, pair_res, periodicity, max_exp_real, twist,
                       records, decay_diagnostic(sol.primal, orders=(0,)))


def _closed(modes, model) -> bool:
    s = set(modes)
    return all(conjugate_mode(model, m)[0] in s for m in modes)


def _grid_profile(fld: CoefficientField, mode, n_t, zero):
    p = fld.get(mode)
    if p is None:
        return zero
    if is_sampled(p) and p.size != n_t + 1:
        return resample(p, n_t)
    return p


def _field_scale(f: PairedField, n_t: int) -> float:
    out = 0.0
    for fld in (f.primal, f.conj):
        for p in fld.profiles.values():
            out = max(out, float(np.max(np.abs(p))) if is_sampled(p) else p.sup_bound())
    return out


def _chunks(n: int, workers: int | None, target: int = 512) -> list:
    parts = max(1, math.ceil(n / target), workers or 1)
    return [a for a in np.array_split(np.arange(n), min(parts, n)) if a.size]


# --------------------------------------------------------------------------- decay

@dataclass
class DecayReport:
    orders: tuple
    table: list            # (weight, beta, supnorm), sorted by weight then beta
    slopes: dict           # beta -> global log-log slope or None
    tail_slopes: dict      # beta -> slope over the upper half of bins or None
    smooth_threshold: float
    smooth_compatible: dict  # beta -> bool or None when undefined

    def to_dict(self) -> dict:
        return {"orders": list(self.orders), "smooth_threshold": self.smooth_threshold,
                "slopes": {str(k): v for k, v in self.slopes.items()},
                "tail_slopes": {str(k): v for k, v in self.tail_slopes.items()},
                "smooth_compatible": {str(k): v for k, v in self.smooth_compatible.items()},
                "table": [{"weight": w, "beta": b, "supnorm": s} for w, b, s in self.table]}

    def to_csv(self) -> str:
        lines = ["weight,beta,supnorm"]
        lines += [f"{w:.17g},{b},{s:.17g}" for w, b, s in self.table]
        return "\n".join(lines) + "\n"


def _slope(ws, vs):
    pts = [(math.log(w), math.log(v)) for w, v in zip(ws, vs) if v > 0]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def decay_diagnostic(f: CoefficientField, orders: Sequence[int] = (0, 1, 2, 3, 4),
                     smooth_threshold: float = 8.0) -> DecayReport:
    """Weight-binned ``max sup_t |d^beta/dt^beta profile|`` and log-log slopes.

    A coefficient sequence of a smooth function decays faster than every
    power of the weight.  At finite truncation the proxy is: the tail slope
    (fit over the upper half of weight bins) is below ``-smooth_threshold``.
    Identically zero derivatives count as smooth-compatible.
    """
    orders = tuple(int(b) for b in orders)
    bins: dict = {}
    for mode, prof in f.profiles.items():
        w = round(math.sqrt(1.0 + float(mode_nu(f.model, mode))), 12)
        for beta in orders:
            if is_sampled(prof):
                sup = float(np.max(np.abs(spectral_derivative(prof, beta) if beta else prof)))
            else:
                sup = trig_sup(prof.derivative(beta) if beta else prof)
            key = (w, beta)
            bins[key] = max(bins.get(key, 0.0), sup)
    table = sorted((w, beta, s) for (w, beta), s in bins.items())
    slopes, tails, smooth = {}, {}, {}
    for beta in orders:
        rows = [(w, s) for w, b, s in table if b == beta]
        ws = [w for w, _ in rows]
        vs = [s for _, s in rows]
        slopes[beta] = _slope(ws, vs)
        half = len(rows) // 2
        tails[beta] = _slope(ws[half:], vs[half:]) if len(rows) >= 4 else slopes[beta]
        if len(rows) >= 2 and all(v == 0 for v in vs[1:]):
            smooth[beta] = True
        elif tails[beta] is None:
            smooth[beta] = None
        else:
            smooth[beta] = tails[beta] < -smooth_threshold
    return DecayReport(orders, table, slopes, tails, smooth_threshold, smooth)


# --------------------------------------------------------------------------- serialization

def _encode_complex(arr) -> list:
    arr = np.asarray(arr, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in arr]


def _decode_complex(data, what: str) -> np.ndarray:
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected a list of [re, im] pairs") from exc
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what}: non-finite entries")
    return arr


def encode_mode(model: GroupModel, mode) -> list:
    return [list(e) for e in mode]


def decode_mode(model: GroupModel, data, where: str = "mode") -> tuple:
    try:
        mode = tuple(tuple(int(x) for x in entry) for entry in data)
    except TypeError as exc:
        raise ConfigError(f"{where}: expected a list of per-factor index lists") from exc
    try:
        check_mode(model, mode)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return mode


def _encode_profile(p) -> dict:
    if is_sampled(p):
        return {"samples": _encode_complex(p)}
    return {"coef": _encode_complex(p.coef)}


def decode_profile(data, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: profile must be an object")
    if "coef" in data:
        return CTrigPoly(_decode_complex(data["coef"], f"{where}.coef"))
    if "samples" in data:
        return _decode_complex(data["samples"], f"{where}.samples")
    if "re" in data or "im" in data:
        re = TrigPoly.from_spec(data.get("re", 0.0))
        im = TrigPoly.from_spec(data.get("im", 0.0))
        return CTrigPoly.from_real_imag(re, im)
    raise ConfigError(f"{where}: profile needs 'coef', 'samples' or 're'/'im'")


def field_to_dict(f: PairedField | CoefficientField) -> dict:
    paired = f if isinstance(f, PairedField) else None
    primal = paired.primal if paired else f
    out = {
        "format": FIELD_FORMAT,
        "factors": [fac.kind.value for fac in primal.model.factors],
        "n_t": primal.n_t,
        "modes": [{"mode": encode_mode(primal.model, m), **_encode_profile(p)} for m, p in primal.profiles.items()],
    }
    if paired:
        out["conj"] = [{"mode": encode_mode(primal.model, m), **_encode_profile(p)}
                       for m, p in paired.conj.profiles.items()]
    return out


def field_from_dict(model: GroupModel, data, support=None) -> PairedField:
    """Parse a field document; without a ``conj`` list the conjugate is built."""
    if isinstance(data, list):
        data = {"modes": data}
    if not isinstance(data, Mapping) or "modes" not in data:
        raise ConfigError("field document needs a 'modes' list")
    if "factors" in data:
        kinds = [fac.kind.value for fac in model.factors]
        if list(data["factors"]) != kinds:
            raise ConfigError(f"field factors {data['factors']} do not match model {kinds}")

    def parse(entries, key):
        profiles = {}
        for i, rec in enumerate(entries):
            where = f"forcing.{key}[{i}]"
            if not isinstance(rec, Mapping) or "mode" not in rec:
                raise ConfigError(f"{where}: record needs a 'mode'")
            mode = decode_mode(model, rec["mode"], where + ".mode")
            if mode in profiles:
                raise ConfigError(f"{where}: duplicate mode {mode}")
            profiles[mode] = decode_profile(rec, where)
        return CoefficientField(model, profiles, None, support)

    primal = parse(data["modes"], "modes")
    if "conj" in data and data["conj"] is not None:
        return PairedField(primal, parse(data["conj"], "conj"))
    return PairedField.from_primal(primal)


def random_field(model: GroupModel, truncation: Sequence, rng: np.random.Generator, degree: int,
                 decay: float = 1.0) -> CoefficientField:
    """Random trig-polynomial field on every mode of the truncation.

    Profiles are scaled by ``weight^-decay`` so that high modes stay moderate.
    """
    from .group import enumerate_modes
    modes = enumerate_modes(model, truncation)
    profiles = {}
    for m in modes:
        w = math.sqrt(1.0 + float(mode_nu(model, m)))
        profiles[m] = CTrigPoly.random(rng, degree, scale=w ** -decay)
    return CoefficientField(model, profiles, None, frozenset(modes))

