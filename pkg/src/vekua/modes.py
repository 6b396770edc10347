"""Per-mode 2x2 algebra and the closed-form twisted periodic solve.

For one mode with scalars ``a = lambda . mu`` and ``b = p0 . mu`` the pair
``w = (u_hat, ubar_hat)`` solves ``w' = M(t) w + F`` with

    M = [[ib + s + (i delta - a) q,  alpha q],
         [conj(alpha) q,             ib + s + (a - i delta) q]].

After ``y = exp(-ibt - S) w`` and ``z = T^{-1} y`` the system decouples into
``z1' = rho q z1 + h1`` and ``z2' = -rho q z2 + h2`` with the twisted
condition ``z(0) = E z(2 pi)``, ``E = exp(2 pi i b + s0)``.  Every propagator
weight used below is written as ``exp(rho * (nonpositive real))`` or
``exp(-rho * (nonnegative real))`` so that it never exceeds one in modulus.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (ConfigError, DegenerateRho, NonNegativityError, QuadratureFailure,
                     ResonantMode, SingularMonodromy)
from .group import GroupModel, ModeScalars
from .trigpoly import TWO_PI, CTrigPoly, TrigPoly, antiderivative, check_nonnegative, mean2pi

GL_ORDER = 5
DEFAULT_NT = 256
# panel resolution limit: max(|rho| * dQ, |b| * h) per panel
MAX_PANEL_PHASE = 1.0
TOL_DEGENERATE = 1e-14


def tol_res(s0: float) -> float:
    return 1e-14 * (1.0 + math.exp(s0))


@dataclass(frozen=True, eq=False)
class VekuaParams:
    """Operator data for ``Pu = du/dt - (p0 + i lam q) X u - (s + i delta q) u - alpha q conj(u)``."""

    group: GroupModel
    delta: float
    alpha: complex
    s: TrigPoly
    q: TrigPoly

    def __post_init__(self):
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.alpha == 0:
            raise ConfigError("alpha must be nonzero (the operator requires alpha in C \\ {0})")
        if not (math.isfinite(self.delta) and cmath.isfinite(self.alpha)):
            raise ConfigError("delta and alpha must be finite")
        check = check_nonnegative(self.q, max(4096, 4 * (self.q.degree + 1)))
        if not check:
            raise NonNegativityError(check.message, check.t_star, check.value)

    @cached_property
    def s0(self) -> float:
        return mean2pi(self.s)

    @cached_property
    def q0(self) -> float:
        return mean2pi(self.q)

    @cached_property
    def Q(self):
        return antiderivative(self.q)

    @cached_property
    def S(self):
        return antiderivative(self.s)

    @cached_property
    def q_max(self) -> float:
        t = np.linspace(0.0, TWO_PI, 4 * (self.q.degree + 1) * 64, endpoint=False)
        return float(np.max(self.q(t)))

    def with_group(self, group: GroupModel) -> "VekuaParams":
        return VekuaParams(group, self.delta, self.alpha, self.s, self.q)


def rho_branch(a, delta, alpha):
    """``sqrt((a - i delta)^2 + |alpha|^2)`` with ``Re >= 0``; ``Im >= 0`` on ties.

    Accepts scalars or arrays for ``a``.
    """
    alpha2 = abs(complex(alpha)) ** 2
    a_arr = np.asarray(a, dtype=float)
    z = (a_arr - 1j * delta) ** 2 + alpha2
    r = np.sqrt(z.astype(complex))
    r = np.where(r.real < 0, -r, r)
    r = np.where(r.real == 0, 1j * np.abs(r.imag), r)
    if np.ndim(a) == 0:
        return complex(r)
    return r


def twist_factor(b, s0):
    """``E = exp(2 pi i b + s0)``: ``z(0) = E z(2 pi)``."""
    return np.exp(TWO_PI * 1j * np.asarray(b, dtype=float) + s0)


def t_matrix(a, delta, alpha, rho):
    alpha = complex(alpha)
    c = a - 1j * delta
    return np.array([[alpha, alpha], [c + rho, c - rho]], dtype=complex)


def t_inverse(a, delta, alpha, rho):
    alpha = complex(alpha)
    c = a - 1j * delta
    return (-1.0 / (2 * alpha * rho)) * np.array([[c - rho, -alpha], [-c - rho, alpha]], dtype=complex)


def mtilde(a, delta, alpha):
    alpha = complex(alpha)
    return np.array([[-a + 1j * delta, alpha], [np.conj(alpha), a - 1j * delta]], dtype=complex)


@dataclass(frozen=True, eq=False)
class ModeSystem:
    a: float
    b: float
    rho: complex
    T: np.ndarray
    Tinv: np.ndarray
    D1: complex
    D2: complex
    E: complex
    s0: float
    q0: float
    delta: float
    alpha: complex

    @property
    def min_denominator(self) -> float:
        return min(abs(self.D1), abs(self.D2))

    def is_resonant(self) -> bool:
        return self.min_denominator < tol_res(self.s0)


def build_mode_system(params: VekuaParams, scalars: ModeScalars, check: bool = True,
                      mode=None) -> ModeSystem:
    a, b = float(scalars.a), float(scalars.b)
    scale = 1.0 + abs(a) + abs(params.delta) + abs(params.alpha)
    rho = rho_branch(a, params.delta, params.alpha)
    if abs(rho) ** 2 <= TOL_DEGENERATE * scale ** 2:
        raise DegenerateRho(f"rho = 0 at a={a:g} (|alpha| = |delta| with vanishing lambda.mu)")
    E = complex(twist_factor(b, params.s0))
    decay = cmath.exp(-rho * params.q0)
    D1 = decay - E
    D2 = 1.0 - decay * E
    system = ModeSystem(
        a=a, b=b, rho=rho,
        T=t_matrix(a, params.delta, params.alpha, rho),
        Tinv=t_inverse(a, params.delta, params.alpha, rho),
        D1=D1, D2=D2, E=E, s0=params.s0, q0=params.q0,
        delta=params.delta, alpha=params.alpha,
    )
    if check and system.is_resonant():
        raise ResonantMode(
            f"resonant mode {mode if mode is not None else (a, b)}: |D1|={abs(D1):.3e}, |D2|={abs(D2):.3e}",
            mode=mode, d1=D1, d2=D2)
    return system


def auto_nt(params: VekuaParams, b_max: float, rho_max: float) -> int:
    """``max(256, 8 ceil|b|, 8 ceil(|rho| q_max))`` keeps every panel resolved."""
    return max(DEFAULT_NT, 8 * math.ceil(abs(b_max)), 8 * math.ceil(rho_max * params.q_max))


class SolverGrid:
    """``n_t + 1`` equispaced times on ``[0, 2 pi]`` with 5-point Gauss-Legendre panels."""

    def __init__(self, params: VekuaParams, n_t: int = DEFAULT_NT):
        if n_t < 4:
            raise ConfigError("n_t must be at least 4")
        self.n_t = int(n_t)
        self.h = TWO_PI / self.n_t
        self.t = np.linspace(0.0, TWO_PI, self.n_t + 1)
        x, w = np.polynomial.legendre.leggauss(GL_ORDER)
        self.offsets = 0.5 * self.h * (x + 1.0)
        self.weights = 0.5 * self.h * w
        self.nodes = self.t[:-1, None] + self.offsets[None, :]
        self.Q_grid = params.Q(self.t)
        self.Q_nodes = params.Q(self.nodes)
        self.S_grid = params.S(self.t)
        self.S_nodes = params.S(self.nodes)
        self.dQ = np.diff(self.Q_grid)
        self.q0 = params.q0
        self._basis = {}

    def basis(self, degree: int):
        """``exp(ikt)`` for ``|k| <= degree`` at grid points and at panel nodes."""
        if degree not in self._basis:
            k = np.arange(-degree, degree + 1)
            self._basis[degree] = (np.exp(1j * np.multiply.outer(self.t, k)),
                                   np.exp(1j * np.multiply.outer(self.nodes.ravel(), k)))
        return self._basis[degree]


def _fourier_shift(samples: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of periodic samples (rows, length N) at
    ``t_j + shift`` for every shift; returns ``(rows, N, len(shifts))``."""
    N = samples.shape[-1]
    c = np.fft.fft(samples, axis=-1)
    k = np.fft.fftfreq(N, d=1.0 / N)
    out = np.empty(samples.shape + (len(shifts),), dtype=complex)
    for r, tau in enumerate(shifts):
        mult = np.exp(1j * k * tau)
        if N % 2 == 0:
            mult[N // 2] = math.cos(N // 2 * tau)
        out[..., r] = np.fft.ifft(c * mult, axis=-1)
    return out


def profiles_on_grid(profiles, grid: SolverGrid):
    """Evaluate a list of profiles (CTrigPoly or ``n_t + 1`` samples) at grid
    points and panel nodes.  Returns ``(values (n, N+1), nodes (n, N, 5))``."""
    n = len(profiles)
    N = grid.n_t
    vals = np.zeros((n, N + 1), dtype=complex)
    nodes = np.zeros((n, N, GL_ORDER), dtype=complex)
    poly_idx = [i for i, p in enumerate(profiles) if isinstance(p, CTrigPoly)]
    samp_idx = [i for i, p in enumerate(profiles) if not isinstance(p, CTrigPoly)]
    if poly_idx:
        K = max(profiles[i].degree for i in poly_idx)
        C = np.stack([profiles[i].padded(K) for i in poly_idx])
        bg, bn = grid.basis(K)
        vals[poly_idx] = C @ bg.T
        nodes[poly_idx] = (C @ bn.T).reshape(len(poly_idx), N, GL_ORDER)
    if samp_idx:
        S = np.stack([np.asarray(profiles[i], dtype=complex) for i in samp_idx])
        if S.shape[1] != N + 1:
            raise ConfigError(f"sampled profile has {S.shape[1]} points, grid needs {N + 1}")
        vals[samp_idx] = S
        nodes[samp_idx] = _fourier_shift(S[:, :-1], grid.offsets)
    return vals, nodes


@dataclass(frozen=True, eq=False)
class ModeSolution:
    grid: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    K1: complex
    K2: complex
    w1: np.ndarray
    w2: np.ndarray
    D1: complex
    D2: complex
    max_exp_real: float
    twist_residual: float = field(default=0.0)


@dataclass(frozen=True, eq=False)
class BatchSolution:
    """Solutions of ``n`` mode systems on a common grid (arrays lead with ``n``)."""

    t: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    max_exp_real: float
    twist_residual: np.ndarray

    def mode(self, i, D1=None, D2=None) -> ModeSolution:
        return ModeSolution(self.t, self.z1[i], self.z2[i], complex(self.K1[i]), complex(self.K2[i]),
                            self.w1[i], self.w2[i], D1, D2, self.max_exp_real,
                            float(self.twist_residual[i]))


def solve_batch(rho, b, E, D1, D2, T, G1n, G2n, grid: SolverGrid, backend=None) -> BatchSolution:
    """Closed-form solve of ``n`` decoupled systems.

    ``G1n``, ``G2n`` are ``T^{-1} F`` at the panel nodes, shape ``(n, N, 5)``.
    """
    rho = np.asarray(rho, dtype=complex)[:, None]
    b = np.asarray(b, dtype=float)
    n = rho.shape[0]
    N = grid.n_t
    resolution = max(float(np.max(np.abs(rho))) * float(np.max(grid.dQ, initial=0.0)),
                     float(np.max(np.abs(b), initial=0.0)) * grid.h)
    if resolution > MAX_PANEL_PHASE:
        raise QuadratureFailure(
            f"panel under-resolved (phase per panel {resolution:.3g} > {MAX_PANEL_PHASE}); increase n_t")

    data = np.exp(-1j * b[:, None, None] * grid.nodes[None] - grid.S_nodes[None])
    h1 = data * G1n
    h2 = data * G2n
    Qg = grid.Q_grid

    # z1: backward partial integrals J_j = int_{t_j}^{2pi} e^{rho (Q(t_j) - Q(s))} h1
    back = (Qg[:-1, None] - grid.Q_nodes)[None]          # <= 0
    arg_a1 = rho[:, :, None] * back
    A1 = np.einsum("nir,r->ni", np.exp(arg_a1) * h1, grid.weights)
    arg_c1 = rho * (-grid.dQ)[None]                        # rho * (Q(t_j) - Q(t_{j+1}))
    J = kernels.scan_backward(np.exp(arg_c1), A1, backend)

    # z2: forward partial integrals I_j = int_0^{t_j} e^{-rho (Q(t_j) - Q(s))} h2
    fwd = (grid.Q_nodes - Qg[1:, None])[None]             # <= 0
    arg_a2 = rho[:, :, None] * fwd
    A2 = np.einsum("nir,r->ni", np.exp(arg_a2) * h2, grid.weights)
    arg_c2 = -rho * grid.dQ[None]
    I = kernels.scan_forward(np.exp(arg_c2), A2, backend)

    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    E = np.asarray(E, dtype=complex)
    K1 = J[:, 0] / D1
    K2 = E * I[:, N] / D2
    arg_k1 = rho * (Qg - grid.q0)[None]
    arg_k2 = -rho * Qg[None]
    z1 = -J + K1[:, None] * np.exp(arg_k1)
    z2 = I + K2[:, None] * np.exp(arg_k2)

    max_exp_real = max(float(np.max(arr.real)) for arr in (arg_a1, arg_c1, arg_a2, arg_c2, arg_k1, arg_k2))
    if not (np.all(np.isfinite(z1)) and np.all(np.isfinite(z2))):
        raise QuadratureFailure("non-finite values in closed-form solve")

    scale = np.exp(1j * b[:, None] * grid.t[None] + grid.S_grid[None])
    T = np.asarray(T, dtype=complex)
    w1 = scale * (T[:, 0, 0, None] * z1 + T[:, 0, 1, None] * z2)
    w2 = scale * (T[:, 1, 0, None] * z1 + T[:, 1, 1, None] * z2)
    twist = np.maximum(np.abs(z1[:, 0] - E * z1[:, -1]), np.abs(z2[:, 0] - E * z2[:, -1]))
    return BatchSolution(grid.t, z1, z2, K1, K2, w1, w2, max_exp_real, twist)


def solve_mode(system: ModeSystem, G1, G2, grid: SolverGrid, backend=None) -> ModeSolution:
    """Solve one mode; ``G1``, ``G2`` are profiles (CTrigPoly, grid samples or callables)."""
    G = []
    for g in (G1, G2):
        if callable(g) and not isinstance(g, CTrigPoly):
            G.append(np.asarray(g(grid.nodes), dtype=complex)[None])
        else:
            G.append(profiles_on_grid([g], grid)[1])
    sol = solve_batch([system.rho], [system.b], [system.E], [system.D1], [system.D2],
                      system.T[None], G[0], G[1], grid, backend)
    return sol.mode(0, system.D1, system.D2)


def solve_mode_forced(system: ModeSystem, F1, F2, grid: SolverGrid, backend=None) -> ModeSolution:
    """Solve one mode from the forcing pair ``F = (f_hat, g_hat)`` (applies ``T^{-1}`` first)."""
    F = []
    for f in (F1, F2):
        if callable(f) and not isinstance(f, CTrigPoly):
            F.append(np.asarray(f(grid.nodes), dtype=complex))
        else:
            F.append(profiles_on_grid([f], grid)[1][0])
    Ti = system.Tinv
    G1 = Ti[0, 0] * F[0] + Ti[0, 1] * F[1]
    G2 = Ti[1, 0] * F[0] + Ti[1, 1] * F[1]
    return solve_mode(system, lambda _: G1, lambda _: G2, grid, backend)


# --------------------------------------------------------------------------- oracle

@dataclass(frozen=True, eq=False)
class ShootingResult:
    t: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    monodromy: np.ndarray
    smin: np.ndarray


def oracle_shooting(params: VekuaParams, a, b, F1, F2, n_t: int = DEFAULT_NT, refine: int = 16,
                    tol_singular: float = 1e-8, backend=None, raise_singular: bool = True) -> ShootingResult:
    """Periodic solution of ``w' = M(t) w + F`` by RK4 shooting.

    ``F1``, ``F2`` are lists of profiles (one per system).  The fundamental
    matrix over one period gives ``(I - Phi) w(0) = w_p(2 pi)``; a relative
    smallest singular value of ``I - Phi`` below ``tol_singular`` raises
    :class:`SingularMonodromy`.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = a.size
    Ns = n_t * refine
    h = TWO_PI / Ns
    t_half = np.linspace(0.0, TWO_PI, 2 * Ns + 1)
    F_half = np.zeros((n, 2 * Ns + 1, 2), dtype=complex)
    for comp, F in enumerate((F1, F2)):
        for i, prof in enumerate(F):
            F_half[i, :, comp] = _profile_at(prof, t_half)
    Y = kernels.rk4_propagate(params.q(t_half), params.s(t_half), a, b, params.delta,
                              params.alpha, F_half, h, backend)
    Phi = Y[:, -1, :, :2]
    wp = Y[:, -1, :, 2]
    IminusPhi = np.eye(2)[None] - Phi
    sv = np.linalg.svd(IminusPhi, compute_uv=False)
    smin = sv[:, -1] / np.maximum(1.0, sv[:, 0])
    bad = np.flatnonzero(smin < tol_singular)
    if bad.size and raise_singular:
        i = int(bad[0])
        raise SingularMonodromy(f"I - Phi(2pi) singular for system {i} (relative sigma_min {smin[i]:.2e})",
                                mode=i)
    w0 = np.linalg.solve(IminusPhi, wp[:, :, None])[:, :, 0]
    traj = np.einsum("nkij,nj->nki", Y[:, ::refine, :, :2], w0) + Y[:, ::refine, :, 2]
    return ShootingResult(np.linspace(0.0, TWO_PI, n_t + 1), traj[:, :, 0], traj[:, :, 1], Phi, smin)


def _profile_at(profile, t: np.ndarray) -> np.ndarray:
    """Profile values on the uniform grid ``t`` (``t[-1] = 2 pi``)."""
    if isinstance(profile, CTrigPoly):
        return profile(t)
    if callable(profile):
        return np.asarray(profile(t), dtype=complex)
    samples = np.asarray(profile, dtype=complex)[:-1]
    N = samples.size
    M = t.size - 1
    if M % N:
        raise ConfigError("oracle grid must refine the sample grid")
    c = np.fft.fft(samples) / N
    padded = np.zeros(M, dtype=complex)
    if N % 2:
        half = N // 2
        padded[:half + 1] = c[:half + 1]
        padded[M - half:] = c[half + 1:]
    else:
        half = N // 2
        padded[:half] = c[:half]
        padded[M - half + 1:] = c[half + 1:]
        padded[half] += 0.5 * c[half]
        padded[M - half] += 0.5 * c[half]
    out = np.fft.ifft(padded) * M
    return np.append(out, out[0])
