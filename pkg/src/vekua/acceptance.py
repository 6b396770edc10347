"""The nine exit criteria as callable checks.

``run_all(scale="full")`` runs them at the stated sizes and tolerances;
``scale="reduced"`` shrinks sample counts (never tolerances) for a quick
self-test.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conditions import (Spectrum, classify_lambda0, dc_prime_equivalence, find_resonances,
                         global_constants, resonances_bruteforce, resonances_quadratic)
from .errors import SingularMonodromy
from .fields import (CoefficientField, PairedField, apply_L, apply_P, conjugate_field,
                     decay_diagnostic, psi_conjugation, random_field, solve_field)
from .group import (GroupFactor, GroupModel, ModeScalars, conjugate_mode, enumerate_modes, mode_mu,
                    mode_nu, mode_scalars, su2_model)
from .modes import (SolverGrid, VekuaParams, build_mode_system, mtilde, oracle_shooting, rho_branch,
                    solve_batch, solve_mode_forced, t_inverse, t_matrix, twist_factor)
from .trigpoly import TWO_PI, CTrigPoly, TrigPoly

SCALES = {
    "full": {"fields": 20, "oracle": 100, "grid4": 200, "theta": 1000, "dc_sets": 50, "dc_L": 200,
             "psi_fields": 10, "invariants": 10_000, "conv_fields": 3},
    "reduced": {"fields": 3, "oracle": 20, "grid4": 200, "theta": 1000, "dc_sets": 10, "dc_L": 60,
                "psi_fields": 3, "invariants": 10_000, "conv_fields": 1},
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number} ({self.name}): {self.detail} [{self.seconds:.2f}s]"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": self.seconds, "metrics": self.metrics}


# --------------------------------------------------------------------------- shared fixtures

def product_model(p0=(0.3, 0.7), lam=(0.0, 0.0)) -> GroupModel:
    return GroupModel((GroupFactor.circle(), GroupFactor.su2()), lam, p0)


ROUNDTRIP_BOUNDS = (3, 2)  # |k| <= 3, l <= 2
ROUNDTRIP_Q = TrigPoly.from_coefficients(1.0, {1: 0.5}, {2: 0.3})


def roundtrip_parameter_sets() -> list:
    """One nonresonant operator per lambda = 0 case 1, 2, 3."""
    model = product_model()
    specs = [
        # case 1: |B0| > |A0|
        (0.5, 2.0, TrigPoly.from_coefficients(0.05, {1: 0.2})),
        # case 2: |B0| <= |A0|, |alpha| > |delta|
        (0.5, 1.0, TrigPoly.from_coefficients(6.0 / TWO_PI, {1: 0.2}, {3: 0.1})),
        # case 3: |alpha| < |delta|, s0 != 0
        (1.0, 0.5, TrigPoly.from_coefficients(0.7 / TWO_PI, {}, {1: 0.3})),
    ]
    return [VekuaParams(model, d, a, s, ROUNDTRIP_Q) for d, a, s in specs]


def _field_error(sol: PairedField, u: PairedField, n_t: int) -> float:
    return max(sol.primal.max_abs_diff(u.primal, n_t), sol.conj.max_abs_diff(u.conj, n_t))


def _timed(fn: Callable) -> Callable:
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# --------------------------------------------------------------------------- criteria

@_timed
def criterion_1(scale="full", seed=1) -> CriterionResult:
    """Manufactured round trip at n_t = 256, max coefficient error <= 1e-7."""
    cfg = SCALES[scale]
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = []
    t0 = time.perf_counter()
    for params in roundtrip_parameter_sets():
        sp = Spectrum.from_model(params.group, ROUNDTRIP_BOUNDS)
        cases.append(classify_lambda0(params, sp, 50).case)
        for _ in range(cfg["fields"]):
            u = PairedField.from_primal(random_field(params.group, ROUNDTRIP_BOUNDS, rng, 6))
            f = apply_P(params, u)
            rep = solve_field(params, f, n_t=256)
            worst = max(worst, _field_error(rep.solution, u, 256))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-7 and cases == [1, 2, 3] and (scale != "full" or elapsed < 30.0)
    return CriterionResult(1, "manufactured round trip", ok,
                           f"max error {worst:.2e} (<= 1e-7), cases {cases}, "
                           f"{3 * cfg['fields']} solves in {elapsed:.1f}s (< 30s)",
                           metrics={"max_error": worst, "cases": cases, "elapsed": elapsed})


def random_oracle_systems(n: int, rng: np.random.Generator, per_params: int = 10):
    """Yield ``(params, a, b, F1, F2)`` batches with ``|D1|, |D2| >= 1e-3``.

    ``Re(rho) q0`` is kept below 9 so the shooting matrix stays well conditioned.
    """
    made = 0
    while made < n:
        q = TrigPoly.from_coefficients(rng.uniform(0.3, 1.0), {1: rng.uniform(-0.15, 0.15)},
                                       {2: rng.uniform(-0.1, 0.1)})
        s = TrigPoly.from_coefficients(rng.uniform(-0.2, 0.2), {1: rng.uniform(-0.3, 0.3)})
        alpha = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        if abs(alpha) < 0.1:
            continue
        delta = rng.uniform(-1.5, 1.5)
        params = VekuaParams(su2_model(), delta, alpha, s, q)
        a_list, b_list = [], []
        while len(a_list) < min(per_params, n - made):
            a, b = rng.uniform(-2.0, 2.0), rng.uniform(-3.0, 3.0)
            rho = rho_branch(a, delta, alpha)
            if rho.real * params.q0 > 9.0 or abs(rho) < 1e-3:
                continue
            sysm = build_mode_system(params, _scalars(a, b), check=False)
            if sysm.min_denominator < 1e-3:
                continue
            a_list.append(a)
            b_list.append(b)
        F1 = [CTrigPoly.random(rng, 4) for _ in a_list]
        F2 = [CTrigPoly.random(rng, 4) for _ in a_list]
        made += len(a_list)
        yield params, np.array(a_list), np.array(b_list), F1, F2


def _scalars(a, b) -> ModeScalars:
    return ModeScalars(float(a), float(b), 1.0)


@_timed
def criterion_2(scale="full", seed=2, backend=None) -> CriterionResult:
    """Closed form vs RK4 shooting on random nonresonant systems, deviation <= 1e-6."""
    n = SCALES[scale]["oracle"]
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    t0 = time.perf_counter()
    for params, a, b, F1, F2 in random_oracle_systems(n, rng):
        grid = SolverGrid(params, 256)
        sh = oracle_shooting(params, a, b, F1, F2, n_t=256, refine=16, backend=backend)
        for i in range(a.size):
            sysm = build_mode_system(params, _scalars(a[i], b[i]))
            sol = solve_mode_forced(sysm, F1[i], F2[i], grid, backend)
            ref = max(np.max(np.abs(sh.w1[i])), np.max(np.abs(sh.w2[i])))
            dev = max(np.max(np.abs(sol.w1 - sh.w1[i])), np.max(np.abs(sol.w2 - sh.w2[i]))) / ref
            worst = max(worst, float(dev))
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and count == n and (scale != "full" or elapsed < 20.0)
    return CriterionResult(2, "oracle equivalence", ok,
                           f"{count} systems, max relative deviation {worst:.2e} (<= 1e-6), {elapsed:.1f}s (< 20s)",
                           metrics={"max_deviation": worst, "systems": count, "elapsed": elapsed})


def witness_params() -> VekuaParams:
    return VekuaParams(product_model(p0=(0.0, 0.0)), math.sqrt(2.0), 1.0,
                       TrigPoly.constant(0.0), TrigPoly.constant(1.0))


@_timed
def criterion_3(scale="full") -> CriterionResult:
    """Resonance witness: three detectors agree."""
    params = witness_params()
    sp = Spectrum.from_model(params.group, ROUNDTRIP_BOUNDS)
    hits = find_resonances(global_constants(params), sp, 50)
    by_mode = {}
    for h in hits:
        by_mode.setdefault(h.mode, set()).add(h.k)
    all_modes = all(by_mode.get(m) == {-1, 1} for m in sp.modes)
    d2 = max(abs(build_mode_system(params, mode_scalars(params.group, m), check=False).D2) for m in sp.modes)
    singular = 0
    for m in sp.modes[:: max(1, len(sp.modes) // 10)]:
        s = mode_scalars(params.group, m)
        try:
            oracle_shooting(params, [s.a], [s.b], [CTrigPoly.constant(1.0)], [CTrigPoly.constant(0.5)],
                            n_t=64, refine=4)
        except SingularMonodromy:
            singular += 1
    checked = len(sp.modes[:: max(1, len(sp.modes) // 10)])
    ok = all_modes and d2 <= 1e-12 and singular == checked
    return CriterionResult(3, "resonance witness", ok,
                           f"hits k=+-1 on {sum(1 for m in sp.modes if by_mode.get(m) == {-1, 1})}/{len(sp)} modes, "
                           f"max |D2| {d2:.1e} (<= 1e-12), SingularMonodromy on {singular}/{checked} oracle runs",
                           metrics={"max_abs_D2": d2, "singular": singular})


def resonance_grid() -> list:
    """200 parameter points ``(s0, delta, alpha, lam, p0)``; several are resonant."""
    pts = []
    for s0 in (0.0, 0.3):
        for delta in (0.0, 1.0, math.sqrt(2.0), 2.0, 3.0):
            for alpha in (0.5, 1.0):
                for lam in (0.0, 0.5):
                    for p0 in (0.0, 0.5, 1.0 / 3.0, 0.25, 1.0):
                        pts.append((s0, delta, alpha, lam, p0))
    return pts


@_timed
def criterion_4(scale="full") -> CriterionResult:
    """Quadratic path and brute-force scan give identical hit sets."""
    mismatches = 0
    total_hits = 0
    for s0, delta, alpha, lam, p0 in resonance_grid():
        params = VekuaParams(su2_model(lam, p0), delta, alpha, TrigPoly.constant(s0 / TWO_PI),
                             TrigPoly.constant(1.0))
        sp = Spectrum.from_model(params.group, (10,))
        c = global_constants(params)
        quad = {(i, k) for i, k in resonances_quadratic(c, sp) if abs(k) <= 50}
        brute = resonances_bruteforce(c, sp, 50)
        mismatches += quad != brute
        total_hits += len(brute)
    n = len(resonance_grid())
    ok = mismatches == 0 and n == 200
    return CriterionResult(4, "quadratic vs brute-force resonance search", ok,
                           f"{n} grid points, {mismatches} mismatching hit sets, {total_hits} hits in total",
                           metrics={"mismatches": mismatches, "hits": total_hits})


@_timed
def criterion_5(scale="full", seed=5) -> CriterionResult:
    """``|e^{i theta}-1|^2 = 2(1-cos theta)`` and (DC)/(DC') verdict agreement."""
    cfg = SCALES[scale]
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-math.pi, math.pi, cfg["theta"])
    identity = float(np.max(np.abs(np.abs(np.exp(1j * theta) - 1.0) ** 2 - 2.0 * (1.0 - np.cos(theta)))))
    agree = 0
    violated = 0
    L = cfg["dc_L"]
    for i in range(cfg["dc_sets"]):
        delta = rng.uniform(1.0, 3.0)
        alpha = rng.uniform(0.1, 0.95) * delta
        q0_mean = rng.uniform(0.5, 1.5)
        if i % 5 == 0:
            p0 = float(rng.integers(1, 4))  # b in Z/2: near-resonant phases occur
            omega = math.sqrt(delta ** 2 - alpha ** 2)
            q0_mean = 1.0 / omega  # q0 omega = 2 pi: theta hits 2 pi Z
        else:
            p0 = rng.uniform(0.0, 1.0)
        M = float(rng.integers(1, 5))
        params = VekuaParams(su2_model(0.0, p0), delta, alpha, TrigPoly.constant(0.0),
                             TrigPoly.constant(q0_mean))
        sp = Spectrum.from_model(params.group, (L,))
        rep = dc_prime_equivalence(params, sp, M, (L,))
        agree += rep.agree and rep.identity_residual <= 1e-12
        violated += not rep.dc_holds
    ok = identity <= 1e-12 and agree == cfg["dc_sets"]
    return CriterionResult(5, "DC / DC' equivalence", ok,
                           f"identity residual {identity:.1e} (<= 1e-12) on {theta.size} angles, "
                           f"verdicts agree on {agree}/{cfg['dc_sets']} sets at L={L} ({violated} violated)",
                           metrics={"identity": identity, "agree": agree, "violated": violated})


@_timed
def criterion_6(scale="full", seed=6) -> CriterionResult:
    """``L0 Psi = Psi L`` to 1e-9 and ``Psi^-1 Psi = I`` to 1e-12."""
    cfg = SCALES[scale]
    rng = np.random.default_rng(seed)
    n_t = 256
    inter = 0.0
    ident = 0.0
    for _ in range(cfg["psi_fields"]):
        p0 = tuple(rng.uniform(-1, 1, 2))
        model = product_model(p0=p0)
        drift = [TrigPoly.from_coefficients(p0[j], {1: rng.uniform(-.5, .5), 2: rng.uniform(-.3, .3)},
                                            {1: rng.uniform(-.5, .5)}) for j in range(2)]
        u = random_field(model, ROUNDTRIP_BOUNDS, rng, 4)
        lhs = apply_L(psi_conjugation(u, drift, "forward", n_t))
        rhs = psi_conjugation(apply_L(u, drift), drift, "forward", n_t)
        inter = max(inter, lhs.max_abs_diff(rhs, n_t))
        back = psi_conjugation(psi_conjugation(u, drift, "forward", n_t), drift, "inverse", n_t)
        ident = max(ident, back.max_abs_diff(u, n_t))
    ok = inter <= 1e-9 and ident <= 1e-12
    return CriterionResult(6, "normal-form intertwining", ok,
                           f"intertwining residual {inter:.1e} (<= 1e-9), round trip {ident:.1e} (<= 1e-12) "
                           f"on {cfg['psi_fields']} fields",
                           metrics={"intertwining": inter, "identity": ident})


@_timed
def criterion_7(scale="full", seed=7) -> CriterionResult:
    """Randomized structural invariants, >= 1e4 samples in total."""
    rng = np.random.default_rng(seed)
    n = SCALES[scale]["invariants"]
    t0 = time.perf_counter()
    samples = 0
    failures = []

    # rho branch: Re >= 0, Im >= 0 on the imaginary axis, rho^2 exact
    a = rng.uniform(-5, 5, n)
    a[: n // 10] = 0.0
    delta = rng.uniform(-3, 3, n)
    alpha = rng.uniform(0.05, 3, n) * np.exp(1j * rng.uniform(0, TWO_PI, n))
    rho = np.array([rho_branch(a[i], delta[i], alpha[i]) for i in range(n)])
    branch = np.all(rho.real >= 0) and np.all(rho.imag[rho.real == 0] >= 0)
    sq = np.max(np.abs(rho ** 2 - ((a - 1j * delta) ** 2 + np.abs(alpha) ** 2)) / (1 + np.abs(rho) ** 2))
    if not (branch and sq <= 1e-13):
        failures.append(f"rho branch ({sq:.1e})")
    samples += n

    # diagonalization T^-1 Mtilde T = diag(rho, -rho)
    m = n // 5
    diag_res = 0.0
    for i in range(m):
        T = t_matrix(a[i], delta[i], alpha[i], rho[i])
        Ti = t_inverse(a[i], delta[i], alpha[i], rho[i])
        D = Ti @ mtilde(a[i], delta[i], alpha[i]) @ T
        scale = 1 + abs(rho[i]) + abs(a[i]) + abs(delta[i]) + abs(alpha[i])
        cond = np.linalg.norm(T) * np.linalg.norm(Ti)
        res = max(np.max(np.abs(D - np.diag([rho[i], -rho[i]]))) / scale,
                  np.max(np.abs(Ti @ T - np.eye(2)))) / cond
        diag_res = max(diag_res, res)
    if diag_res > 1e-13:
        failures.append(f"diagonalization ({diag_res:.1e})")
    samples += m

    # stability contract and twisted boundary condition on a batched solve
    params = VekuaParams(su2_model(), 0.7, 1.3 + 0.4j, TrigPoly.from_coefficients(0.05, {1: 0.3}),
                         TrigPoly.from_coefficients(1.0, {1: 0.6}, {2: 0.2}))
    k = n // 10
    aa = rng.uniform(-20, 20, k)
    bb = rng.uniform(-8, 8, k)
    rr = np.atleast_1d(rho_branch(aa, params.delta, params.alpha))
    E = twist_factor(bb, params.s0)
    dec = np.exp(-rr * params.q0)
    D1, D2 = dec - E, 1.0 - dec * E
    keep = np.minimum(np.abs(D1), np.abs(D2)) > 1e-6
    aa, bb, rr, E, D1, D2 = aa[keep], bb[keep], rr[keep], E[keep], D1[keep], D2[keep]
    grid = SolverGrid(params, 8 * math.ceil(np.max(np.abs(rr)) * params.q_max) + 256)
    T = np.stack([t_matrix(aa[i], params.delta, params.alpha, rr[i]) for i in range(aa.size)])
    G1 = rng.normal(size=(aa.size, 1, 1)) * np.exp(1j * grid.nodes)[None]
    G2 = rng.normal(size=(aa.size, 1, 1)) * np.cos(2 * grid.nodes)[None]
    sol = solve_batch(rr, bb, E, D1, D2, T, G1, G2, grid)
    if sol.max_exp_real > 1e-12:
        failures.append(f"stability contract ({sol.max_exp_real:.1e})")
    zscale = np.maximum(1.0, np.maximum(np.max(np.abs(sol.z1), axis=1), np.max(np.abs(sol.z2), axis=1)))
    twist = float(np.max(sol.twist_residual / zscale))
    if twist > 1e-10:
        failures.append(f"twisted boundary ({twist:.1e})")
    samples += 2 * aa.size

    # |mu| <= <xi> and conjugation involution over random modes
    model = product_model()
    modes = enumerate_modes(model, (6, 3))
    pick = rng.choice(len(modes), size=min(n, len(modes)), replace=False)
    bad_mu = bad_inv = 0
    for j in pick:
        md = modes[j]
        mu = math.sqrt(sum(float(x) ** 2 for x in mode_mu(model, md)))
        w = math.sqrt(1 + float(mode_nu(model, md)))
        bad_mu += mu > w
        mb, ph = conjugate_mode(model, md)
        mbb, ph2 = conjugate_mode(model, mb)
        bad_inv += mbb != md or ph * ph2 != 1
    u = random_field(model, (3, 2), rng, 3)
    inv = conjugate_field(conjugate_field(u)).max_abs_diff(u, 64)
    if bad_mu or bad_inv or inv > 1e-12:
        failures.append(f"mu bound / involution ({bad_mu}, {bad_inv}, {inv:.1e})")
    samples += 2 * len(pick)

    elapsed = time.perf_counter() - t0
    ok = not failures and samples >= 10_000 and elapsed < 10.0
    detail = (f"{samples} samples in {elapsed:.1f}s (< 10s); "
              + ("all invariants hold" if not failures else "failed: " + ", ".join(failures)))
    return CriterionResult(7, "structural invariants", ok, detail, metrics={"samples": samples})


def calibration_fields(L: int = 12):
    """``<xi>^-2`` exact and ``e^-l`` fields on SU(2) with ``l <= L``."""
    model = su2_model()
    modes = enumerate_modes(model, (L,))
    poly = {}
    expo = {}
    for m in modes:
        w = math.sqrt(1 + float(mode_nu(model, m)))
        l = m[0][0] / 2
        poly[m] = CTrigPoly.constant(w ** -2)
        expo[m] = CTrigPoly(np.array([0, 1, 1], dtype=complex) * math.exp(-l))
    return CoefficientField(model, poly), CoefficientField(model, expo)


@_timed
def criterion_8(scale="full") -> CriterionResult:
    """Decay slope -2 +- 0.1 on the polynomial field; e^-l flagged smooth for beta <= 4."""
    poly, expo = calibration_fields()
    rp = decay_diagnostic(poly, orders=(0,))
    re = decay_diagnostic(expo, orders=(0, 1, 2, 3, 4))
    slope = rp.slopes[0]
    ok_poly = slope is not None and abs(slope + 2.0) <= 0.1 and not rp.smooth_compatible[0]
    ok_exp = all(re.smooth_compatible[b] for b in range(5))
    tails = ", ".join(f"{re.tail_slopes[b]:.1f}" for b in range(5))
    return CriterionResult(8, "decay diagnostic calibration", ok_poly and ok_exp,
                           f"polynomial slope {slope:.3f} (-2 +- 0.1); e^-l tail slopes [{tails}] "
                           f"flagged smooth at beta 0..4: {ok_exp}",
                           metrics={"slope": slope, "tails": [re.tail_slopes[b] for b in range(5)]})


def convergence_errors(params, u: PairedField, sizes=(128, 256, 512)) -> list:
    f = apply_P(params, u)
    return [_field_error(solve_field(params, f, n_t=n).solution, u, n) for n in sizes]


def doubling_ok(errors, floor: float = 1e-7, ratio: float = 16.0) -> bool:
    """Each doubling either gains ``ratio`` or lands at or below ``floor``."""
    return all(fine <= max(coarse / ratio, floor) for coarse, fine in zip(errors, errors[1:]))


@_timed
def criterion_9(scale="full", seed=9) -> CriterionResult:
    """Grid doubling 128 -> 256 -> 512 consistent with order >= 4."""
    rng = np.random.default_rng(seed)
    rows = []
    for params in roundtrip_parameter_sets():
        for _ in range(SCALES[scale]["conv_fields"]):
            u = PairedField.from_primal(random_field(params.group, ROUNDTRIP_BOUNDS, rng, 6))
            rows.append(convergence_errors(params, u))
    ok = all(doubling_ok(r) for r in rows)
    worst = [max(r[i] for r in rows) for i in range(3)]
    return CriterionResult(9, "convergence order", ok,
                           "max errors at n_t=128/256/512: " + " / ".join(f"{e:.1e}" for e in worst)
                           + " (ratio >= 16 or <= 1e-7 per doubling)",
                           metrics={"errors": rows})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


def run_all(scale: str = "full", only=None) -> list:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}")
    out = []
    for i, crit in enumerate(CRITERIA, start=1):
        if only is None or i in only:
            out.append(crit(scale))
    return out


if __name__ == "__main__":
    for r in run_all():
        print(r.line())
