"""Solvability hypotheses as executable checks.

All checks work on a truncated spectrum and say so: a verdict "holds" means
"no violation among the modes examined" unless the report is marked
``certified`` (the quantity depends only on finitely many residues, all of
which were examined).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import HypothesisViolation
from .group import FactorKind, GroupModel, ModeScalars, enumerate_spectrum_modes, spectrum_arrays
from .modes import VekuaParams, rho_branch, twist_factor
from .trigpoly import TWO_PI

TOL_INT = 1e-9
TOL_RES_CHECK = 1e-9
# near a double root the integer candidate is only pinned to ~sqrt(tol); the
# residual predicate makes the final call
CANDIDATE_SLACK = 1e-3
TOL_ZERO = 1e-14


@dataclass(frozen=True)
class GlobalConstants:
    A0: complex
    B0: complex
    s0: float
    q0: float
    delta: float
    alpha: complex
    C0: tuple  # per factor: 2 pi p0_j + i lam_j q0

    def mu_C0(self, a, b):
        """``mu . C0 = 2 pi b + i a q0`` for mode scalars ``(a, b)``."""
        return TWO_PI * np.asarray(b) + 1j * np.asarray(a) * self.q0

    @property
    def rhs(self) -> float:
        """``|A0|^2 - |B0|^2``."""
        return abs(self.A0) ** 2 - abs(self.B0) ** 2


def global_constants(params: VekuaParams) -> GlobalConstants:
    s0, q0 = params.s0, params.q0
    C0 = tuple(complex(TWO_PI * p, lam * q0) for p, lam in zip(params.group.p0, params.group.lam))
    return GlobalConstants(A0=complex(s0, params.delta * q0), B0=params.alpha * q0, s0=s0, q0=q0,
                           delta=params.delta, alpha=params.alpha, C0=C0)


@dataclass(frozen=True)
class Spectrum:
    """Mode scalars as arrays; ``modes`` may be ``None`` for synthetic spectra."""

    a: np.ndarray
    b: np.ndarray
    weight: np.ndarray
    modes: list | None = None

    @classmethod
    def from_model(cls, model: GroupModel, truncation: Sequence) -> "Spectrum":
        modes = enumerate_spectrum_modes(model, truncation)
        a, b, w, _ = spectrum_arrays(model, modes)
        return cls(a, b, w, modes)

    @classmethod
    def from_scalars(cls, scalars: Sequence[ModeScalars]) -> "Spectrum":
        return cls(np.array([s.a for s in scalars], dtype=float),
                   np.array([s.b for s in scalars], dtype=float),
                   np.array([s.weight for s in scalars], dtype=float))

    def __len__(self):
        return self.a.size

    def label(self, i):
        return self.modes[i] if self.modes is not None else i


def _as_spectrum(spectrum) -> Spectrum:
    if isinstance(spectrum, Spectrum):
        return spectrum
    return Spectrum.from_scalars(list(spectrum))


# --------------------------------------------------------------------------- resonances

@dataclass(frozen=True)
class ResonanceHit:
    a: float
    b: float
    k: int
    r1: float  # relative residual of Re(A0 (2 pi k + mu . conj(C0))) = 0
    r2: float  # relative residual of |2 pi k + mu . C0|^2 = |A0|^2 - |B0|^2
    mode: object = None

    @property
    def key(self):
        return (self.a, self.b, self.k)


def resonance_residuals(c: GlobalConstants, a, b, k):
    """Relative residuals of the two resonance equations (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.asarray(k, dtype=float)
    x = k + b
    r1 = TWO_PI * c.s0 * x + c.delta * a * c.q0 ** 2
    scale1 = TWO_PI * abs(c.s0) * (np.abs(k) + np.abs(b)) + abs(c.delta) * np.abs(a) * c.q0 ** 2 + 1.0
    r2 = (TWO_PI * x) ** 2 + (a * c.q0) ** 2 - c.rhs
    scale2 = (TWO_PI * (np.abs(k) + np.abs(b))) ** 2 + (a * c.q0) ** 2 + abs(c.A0) ** 2 + abs(c.B0) ** 2 + 1.0
    return r1 / scale1, r2 / scale2


def _is_hit(r1, r2, tol):
    return (np.abs(r1) <= tol) & (np.abs(r2) <= tol)


def resonances_quadratic(c: GlobalConstants, spectrum, tol: float = TOL_RES_CHECK) -> set:
    """Hit set ``{(i, k)}`` from solving the quadratic for ``x = k + b``."""
    sp = _as_spectrum(spectrum)
    X = (c.rhs - (sp.a * c.q0) ** 2) / TWO_PI ** 2
    scale = (c.rhs + (sp.a * c.q0) ** 2 + abs(c.A0) ** 2 + abs(c.B0) ** 2 + 1.0) / TWO_PI ** 2
    hits = set()
    ok = X >= -tol * scale
    root = np.sqrt(np.maximum(X, 0.0))
    candidates = [root - sp.b, -root - sp.b]
    if abs(c.s0) > 0:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            candidates.append(-c.delta * sp.a * c.q0 ** 2 / (TWO_PI * c.s0) - sp.b)
    for cand in candidates:
        # beyond 2^52 the rounding no longer resolves integers; such roots are not hits
        cand = np.where(np.abs(cand) < 2.0 ** 52, cand, np.nan)
        ok_c = ok & np.isfinite(cand)
        cand = np.where(ok_c, cand, 0.0)
        k = np.rint(cand)
        near = np.abs(cand - k) <= np.maximum(TOL_INT * np.maximum(1.0, np.abs(cand)), CANDIDATE_SLACK)
        r1, r2 = resonance_residuals(c, sp.a, sp.b, k)
        for i in np.flatnonzero(ok_c & near & _is_hit(r1, r2, tol)):
            hits.add((int(i), int(k[i])))
    return hits


def resonances_bruteforce(c: GlobalConstants, spectrum, k_bound: int, tol: float = TOL_RES_CHECK) -> set:
    """Hit set ``{(i, k)}`` by scanning ``k in [-k_bound, k_bound]``."""
    sp = _as_spectrum(spectrum)
    ks = np.arange(-k_bound, k_bound + 1)
    hits = set()
    chunk = max(1, 2_000_000 // ks.size)
    for start in range(0, len(sp), chunk):
        a = sp.a[start:start + chunk, None]
        b = sp.b[start:start + chunk, None]
        r1, r2 = resonance_residuals(c, a, b, ks[None, :])
        for i, j in zip(*np.nonzero(_is_hit(r1, r2, tol))):
            hits.add((int(i) + start, int(ks[j])))
    return hits


def find_resonances(constants: GlobalConstants, spectrum, k_bound: int,
                    tol: float = TOL_RES_CHECK) -> list:
    """Integer solutions ``k`` of the resonance system, mode by mode.

    Hits come from the quadratic solve; the brute-force scan over
    ``|k| <= k_bound`` is merged in as a cross-check (see
    :func:`resonance_cross_check` for the agreement test).
    """
    sp = _as_spectrum(spectrum)
    found = resonances_quadratic(constants, sp, tol) | resonances_bruteforce(constants, sp, k_bound, tol)
    out = []
    for i, k in sorted(found):
        r1, r2 = resonance_residuals(constants, sp.a[i], sp.b[i], k)
        out.append(ResonanceHit(float(sp.a[i]), float(sp.b[i]), k, float(r1), float(r2), sp.label(i)))
    return out


def resonance_cross_check(constants: GlobalConstants, spectrum, k_bound: int,
                          tol: float = TOL_RES_CHECK) -> dict:
    sp = _as_spectrum(spectrum)
    quad = {(i, k) for i, k in resonances_quadratic(constants, sp, tol) if abs(k) <= k_bound}
    brute = resonances_bruteforce(constants, sp, k_bound, tol)
    return {"quadratic": quad, "bruteforce": brute, "agree": quad == brute}


# --------------------------------------------------------------------------- diophantine

@dataclass
class DiophantineReport:
    kind: str
    M: float
    truncation: tuple | None
    table: list                 # [(weight, min quantity)] sorted by weight
    M_hat: float | None
    fit_residual: float | None
    holds: bool
    witness: dict | None = None
    certified: bool = False
    n_modes: int = 0

    @property
    def verdict(self) -> str:
        if self.holds:
            return "holds" if self.certified and self.kind == "DC" else "holds-up-to-L"
        return "violated"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "M": self.M, "truncation": list(self.truncation) if self.truncation else None,
            "verdict": self.verdict, "holds": self.holds, "certified": self.certified,
            "M_hat": self.M_hat, "fit_residual": self.fit_residual, "witness": self.witness,
            "n_modes": self.n_modes,
            "minima": [{"weight": w, "min": m} for w, m in self.table],
        }


def omega(params: VekuaParams) -> float:
    """``sqrt(delta^2 - |alpha|^2)`` (requires ``|alpha| < |delta|``)."""
    return math.sqrt(params.delta ** 2 - abs(params.alpha) ** 2)


def dc_phase(params: VekuaParams, b) -> np.ndarray:
    """``theta = 2 pi b - q0 omega``."""
    return TWO_PI * np.asarray(b, dtype=float) - params.q0 * omega(params)


def dist_2pi(theta) -> np.ndarray:
    """Distance from ``theta`` to ``2 pi Z``."""
    r = np.remainder(np.asarray(theta, dtype=float), TWO_PI)
    return np.minimum(r, TWO_PI - r)


def dc_quantity(params: VekuaParams, b) -> np.ndarray:
    """``min_k |2 pi k + 2 pi b - q0 omega|``."""
    return dist_2pi(dc_phase(params, b))


def dc_prime_quantity(params: VekuaParams, b) -> np.ndarray:
    """``|exp(i theta) - 1|``."""
    return np.abs(np.exp(1j * dc_phase(params, b)) - 1.0)


def denominator_quantity(params: VekuaParams, a, b) -> np.ndarray:
    """``min(|D1|, |D2|)`` per mode."""
    rho = np.atleast_1d(rho_branch(np.asarray(a, dtype=float), params.delta, params.alpha))
    E = twist_factor(b, params.s0)
    decay = np.exp(-rho * params.q0)
    return np.minimum(np.abs(decay - E), np.abs(1.0 - decay * E))


def bound_holds(quantity, weight, M, factor: float = 1.0):
    """Modes with ``weight >= M`` must satisfy ``quantity >= factor * weight^-M``.

    Returns ``(holds, index of worst violation or None)``.
    """
    quantity = np.asarray(quantity, dtype=float)
    weight = np.asarray(weight, dtype=float)
    active = weight >= M
    if not np.any(active):
        return True, None
    margin = np.where(active, quantity - factor * weight ** (-float(M)), np.inf)
    if np.all(margin >= 0):
        return True, None
    return False, int(np.argmin(margin))


def _minima_table(quantity, weight, w_min=1.0):
    key = np.round(weight, 12)
    table = {}
    for w, qv in zip(key, quantity):
        if w >= w_min - 1e-12:
            table[w] = min(table.get(w, np.inf), qv)
    return sorted((float(w), float(v)) for w, v in table.items())


def fit_exponent(table):
    """Least-squares ``log(min) = c - M_hat log(weight)``; ``None`` if fewer than two usable bins."""
    pts = [(math.log(w), math.log(v)) for w, v in table if v > 0 and w > 0]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None, None
    x, y = np.array(pts).T
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(-coef[0]), resid


def _rational(x: float, max_den: int = 10_000):
    fr = Fraction(x).limit_denominator(max_den)
    return fr if abs(float(fr) - x) <= 1e-12 * max(1.0, abs(x)) else None


def residues_covered(model: GroupModel, truncation) -> bool:
    """True when ``b = p0 . mu mod 1`` takes every value it can over the full
    dual within the truncation (all ``p0_j`` rational, bounds wide enough)."""
    if truncation is None:
        return False
    for factor, p, bound in zip(model.factors, model.p0, truncation):
        fr = _rational(p)
        if fr is None:
            return False
        if fr == 0:
            continue
        if factor.kind is FactorKind.CIRCLE:
            if int(bound) < fr.denominator - 1:
                return False
        else:
            # mu = twoM / 2: residues of twoM * p / 2 have period 2 * denominator in twoM
            if 2 * Fraction(bound) < 2 * fr.denominator - 1:
                return False
    return True


def diophantine_check(params: VekuaParams, spectrum, M: float, kind: str = "auto",
                      truncation=None) -> DiophantineReport:
    """Check (DC) or the denominator condition (III) on a truncated spectrum.

    ``kind="DC"`` needs ``|alpha| < |delta|`` and ``s0 = 0``; ``"auto"``
    picks DC when those hold and III otherwise.
    """
    sp = _as_spectrum(spectrum)
    dc_ok = abs(params.alpha) < abs(params.delta) and abs(params.s0) <= TOL_ZERO
    if kind == "auto":
        kind = "DC" if dc_ok and params.group.lambda_is_zero else "III"
    if kind == "DC":
        if not dc_ok:
            raise HypothesisViolation("(DC) applies only when |alpha| < |delta| and s0 = 0")
        quantity = dc_quantity(params, sp.b)
    elif kind == "III":
        quantity = denominator_quantity(params, sp.a, sp.b)
    else:
        raise ValueError(f"unknown diophantine kind {kind!r}")
    holds, worst = bound_holds(quantity, sp.weight, M)
    table = _minima_table(quantity, sp.weight, w_min=max(M, 1.0))
    M_hat, resid = fit_exponent(table)
    witness = None
    if not holds:
        witness = {"mode": _jsonable(sp.label(worst)), "a": float(sp.a[worst]), "b": float(sp.b[worst]),
                   "weight": float(sp.weight[worst]), "quantity": float(quantity[worst]),
                   "bound": float(sp.weight[worst] ** (-float(M)))}
    certified = params.group.lambda_is_zero and residues_covered(params.group, truncation)
    return DiophantineReport(kind, float(M), tuple(truncation) if truncation is not None else None,
                             table, M_hat, resid, holds, witness, certified, len(sp))


@dataclass
class DCPairReport:
    M: float
    dc_holds: bool
    dcp_holds: bool
    dcp_holds_next: bool        # (DC') at exponent M + 1
    identity_residual: float    # max | |e^{i theta}-1|^2 - 2(1 - cos theta) |
    bounds_residual: float      # max violation of (2/pi) dist <= |e^{i theta}-1| <= dist
    dcp_implies_dc: bool
    dc_implies_dcp_next: bool
    dc: DiophantineReport = field(repr=False, default=None)

    @property
    def agree(self) -> bool:
        return self.dcp_implies_dc and self.dc_implies_dcp_next and self.bounds_residual <= 1e-12

    def to_dict(self) -> dict:
        return {"M": self.M, "dc_holds": self.dc_holds, "dcp_holds": self.dcp_holds,
                "dcp_holds_at_M_plus_1": self.dcp_holds_next,
                "identity_residual": self.identity_residual, "bounds_residual": self.bounds_residual,
                "dcp_implies_dc": self.dcp_implies_dc, "dc_implies_dcp_next": self.dc_implies_dcp_next,
                "agree": self.agree}


def dc_prime_equivalence(params: VekuaParams, spectrum, M: float, truncation=None) -> DCPairReport:
    """Evaluate (DC) and (DC') on the same modes and check their comparability.

    With ``theta`` the DC phase, ``|e^{i theta}-1|^2 = 2(1 - cos theta)`` and
    ``(2/pi) dist(theta, 2 pi Z) <= |e^{i theta}-1| <= dist(theta, 2 pi Z)``.
    Hence (DC') at ``M`` implies (DC) at ``M``, and (DC) at ``M`` implies (DC')
    at ``M + 1`` (for weights ``>= 2``, ``(2/pi) w^-M >= w^-(M+1)``).
    """
    sp = _as_spectrum(spectrum)
    if not (abs(params.alpha) < abs(params.delta) and abs(params.s0) <= TOL_ZERO):
        raise HypothesisViolation("(DC)/(DC') comparison needs |alpha| < |delta| and s0 = 0")
    theta = dc_phase(params, sp.b)
    dist = dist_2pi(theta)
    dcp = np.abs(np.exp(1j * theta) - 1.0)
    identity = float(np.max(np.abs(dcp ** 2 - 2.0 * (1.0 - np.cos(theta))), initial=0.0))
    lower = (2.0 / math.pi) * dist - dcp
    upper = dcp - dist
    bounds = float(max(np.max(lower, initial=0.0), np.max(upper, initial=0.0), 0.0))
    dc_holds, _ = bound_holds(dist, sp.weight, M)
    dcp_holds, _ = bound_holds(dcp, sp.weight, M)
    dcp_next, _ = bound_holds(dcp, sp.weight, M + 1)
    report = diophantine_check(params, sp, M, kind="DC", truncation=truncation)
    return DCPairReport(float(M), dc_holds, dcp_holds, dcp_next, identity, bounds,
                        (not dcp_holds) or dc_holds, (not dc_holds) or dcp_next, report)


# --------------------------------------------------------------------------- lambda = 0 cases

@dataclass
class Lambda0Verdict:
    case: int
    solvable: bool
    reason: str
    hits: list = field(default_factory=list)
    diophantine: DiophantineReport | None = None

    @property
    def summary(self) -> str:
        status = "solvable" if self.solvable else "conditions fail"
        return f"case {self.case}: {status}"

    def to_dict(self) -> dict:
        return {
            "case": self.case, "solvable": self.solvable, "summary": self.summary, "reason": self.reason,
            "resonance_hits": [hit_to_dict(h) for h in self.hits],
            "diophantine": self.diophantine.to_dict() if self.diophantine else None,
        }


def classify_lambda0(params: VekuaParams, spectrum, k_bound: int, M: float = 2.0,
                     truncation=None) -> Lambda0Verdict:
    """Which of the four ``lambda = 0`` cases applies, and whether its conditions hold."""
    if not params.group.lambda_is_zero:
        raise HypothesisViolation("classify_lambda0 requires every lambda_j = 0")
    abs_alpha, abs_delta = abs(params.alpha), abs(params.delta)
    if math.isclose(abs_alpha, abs_delta, rel_tol=1e-12, abs_tol=0.0):
        raise HypothesisViolation("|alpha| = |delta| violates hypothesis (I)")
    c = global_constants(params)
    if abs(c.B0) > abs(c.A0):
        return Lambda0Verdict(1, True, "|B0| > |A0|")
    sp = _as_spectrum(spectrum)
    if abs_alpha > abs_delta:
        hits = find_resonances(c, sp, k_bound)
        reason = "|B0| <= |A0|, |alpha| > |delta|; " + (
            "resonance system has integer solutions" if hits else "no resonance up to truncation")
        return Lambda0Verdict(2, not hits, reason, hits)
    if abs(c.s0) > TOL_ZERO:
        return Lambda0Verdict(3, True, "|alpha| < |delta| and s0 != 0")
    hits = find_resonances(c, sp, k_bound)
    dc = diophantine_check(params, sp, M, kind="DC", truncation=truncation)
    ok = not hits and dc.holds
    reason = "|alpha| < |delta|, s0 = 0; " + ("no resonance" if not hits else "resonance found") + \
        f"; (DC) {dc.verdict} at M={M:g}"
    return Lambda0Verdict(4, ok, reason, hits, dc)


def hit_to_dict(h: ResonanceHit) -> dict:
    return {"mode": _jsonable(h.mode), "a": h.a, "b": h.b, "k": h.k, "r1": h.r1, "r2": h.r2}


def _jsonable(mode):
    if isinstance(mode, tuple):
        return [_jsonable(m) for m in mode]
    if isinstance(mode, (np.integer,)):
        return int(mode)
    return mode
