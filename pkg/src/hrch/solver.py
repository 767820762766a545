"""Modal time integration of the hyperbolically relaxed viscous Cahn-Hilliard system.

Per Neumann mode ``k`` the Galerkin system reads::

    alpha mu_k'' + phi_k' + lam_k mu_k = 0
    tau phi_k' + lam_k phi_k + N_k(phi) = mu_k + g_k

with ``N_k`` the Galerkin coefficient of ``f'_{1,eps}(phi) + f2'(phi)``.
It is advanced with an implicit midpoint rule on the linear part and a
predictor/Picard treatment of ``N``; with ``nu = mu'`` each mode reduces
to a 2x2 linear solve in the increments ``(nu^{n+1}-nu^n, phi^{n+1}-phi^n)``.
Mode 1 has ``lam_1 = 0``, so ``alpha nu_1 + phi_1`` is conserved exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

import numpy as np

from .errors import ConfigError, DomainError
from .potentials import PotentialKind, SplitPotential, YosidaParams
from .spectral import SpectralBasis, build_basis, default_M, fit_coeffs, nonlinear_term, project, synth

# phi0 must stay this far inside (-1, 1) for the logarithmic potential
LOG_ADMISSIBILITY_MARGIN = 1e-8


# -- data specifications -----------------------------------------------------


@dataclass(frozen=True)
class CosineSeries:
    """``mean + sum_k a_k cos(k pi x / L)``, given as (k, a_k) pairs."""

    mean: float = 0.0
    terms: tuple = ()

    def coeffs(self, basis: SpectralBasis) -> np.ndarray:
        c = np.zeros(basis.n)
        c[0] = self.mean * math.sqrt(basis.L)
        for k, a in self.terms:
            k = int(k)
            if k < 0:
                raise ConfigError(f"cosine mode must be >= 0, got {k}")
            if k == 0:
                c[0] += a * math.sqrt(basis.L)
            elif k < basis.n:
                c[k] += a * math.sqrt(basis.L / 2.0)
        return c

    def __call__(self, x, L):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.mean)
        for k, a in self.terms:
            out = out + a * np.cos(k * np.pi * x / L)
        return out


@dataclass(frozen=True)
class Coeffs:
    """Explicit coefficients against e_1, e_2, ... (truncated/padded to n)."""

    values: tuple

    def coeffs(self, basis):
        return fit_coeffs(basis, self.values)


@dataclass(frozen=True)
class Samples:
    """Values at the M collocation nodes."""

    values: tuple

    def coeffs(self, basis):
        return project(basis, np.asarray(self.values, dtype=float))


FieldSource = Union[CosineSeries, Coeffs, Samples]


@dataclass(frozen=True)
class ForcingTerm:
    amplitude: float
    mode: int = 0
    time_c0: float = 1.0
    time_c1: float = 0.0


@dataclass(frozen=True)
class ForcingSpec:
    """g(x, t) = sum a cos(k pi x / L) (c0 + c1 t)."""

    terms: tuple = ()

    def amplitudes(self, t, kmax):
        """Cosine amplitudes A_k(t) for k = 0..kmax-1."""
        A = np.zeros(kmax)
        for term in self.terms:
            if term.mode < kmax:
                A[term.mode] += term.amplitude * (term.time_c0 + term.time_c1 * t)
        return A

    def _scale(self, L, kmax):
        s = np.full(kmax, math.sqrt(L / 2.0))
        s[0] = math.sqrt(L)
        return s

    def coeffs(self, basis: SpectralBasis, t: float) -> np.ndarray:
        return self.amplitudes(t, basis.n) * self._scale(basis.L, basis.n)

    def dt_coeffs(self, basis: SpectralBasis) -> np.ndarray:
        A = np.zeros(basis.n)
        for term in self.terms:
            if term.mode < basis.n:
                A[term.mode] += term.amplitude * term.time_c1
        return A * self._scale(basis.L, basis.n)

    def values(self, x, L, t):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + term.amplitude * (term.time_c0 + term.time_c1 * t) * np.cos(term.mode * np.pi * x / L)
        return out

    @property
    def is_zero(self):
        return all(t.amplitude == 0 for t in self.terms)

    def max_mode(self):
        return max((t.mode for t in self.terms), default=0)

    def __add__(self, other):
        return ForcingSpec(tuple(self.terms) + tuple(other.terms))

    def scaled(self, factor):
        return ForcingSpec(tuple(replace(t, amplitude=t.amplitude * factor) for t in self.terms))


def l2h_distance(g1: ForcingSpec, g2: ForcingSpec, L: float, T: float) -> float:
    """||g1 - g2||_{L^2(0,T; H)} computed exactly (amplitudes are linear in t)."""
    kmax = max(g1.max_mode(), g2.max_mode()) + 1
    w = np.full(kmax, L / 2.0)
    w[0] = L
    # two-point Gauss-Legendre is exact for the quadratic integrand
    nodes = T / 2.0 * (1.0 + np.array([-1.0, 1.0]) / math.sqrt(3.0))
    total = 0.0
    for t in nodes:
        d = g1.amplitudes(t, kmax) - g2.amplitudes(t, kmax)
        total += T / 2.0 * float(np.sum(w * d * d))
    return math.sqrt(total)


@dataclass(frozen=True)
class InitSpec:
    mu0: FieldSource = CosineSeries()
    nu0: FieldSource = CosineSeries()
    phi0: FieldSource = CosineSeries()


@dataclass(frozen=True)
class SimConfig:
    alpha: float
    tau: float
    yosida: YosidaParams
    potential: SplitPotential
    L: float = 1.0
    n: int = 32
    M: int | None = None
    dt: float | None = None
    T: float = 1.0
    forcing: ForcingSpec = ForcingSpec()
    init: InitSpec = InitSpec()
    picard_iters: int = 2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0,1]", "alpha")
        if not self.tau > 0:
            raise ConfigError("tau must be positive", "tau")
        if not self.T > 0:
            raise ConfigError("T must be positive", "T")
        if self.dt is not None and not 0 < self.dt < self.T:
            raise ConfigError("dt must satisfy 0 < dt < T", "dt")
        if int(self.picard_iters) != self.picard_iters or self.picard_iters < 0:
            raise ConfigError("picard_iters must be a nonnegative integer", "picard_iters")
        steps = self.T / self.time_step
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ConfigError(f"T/dt = {steps} is not an integer", "dt")

    def require_hyperbolic(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0,1]", "alpha")

    @property
    def time_step(self) -> float:
        if self.dt is not None:
            return float(self.dt)
        cands = [1e-3, self.tau / 10.0]
        if self.alpha > 0:
            cands.append(math.sqrt(self.alpha) / 10.0)
        h = min(cands)
        # round down so that T is an integer number of steps
        return self.T / math.ceil(self.T / h - 1e-9)

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.time_step))

    @property
    def collocation_points(self) -> int:
        return self.M if self.M is not None else default_M(self.n, self.potential.kind)

    @cached_property
    def basis(self) -> SpectralBasis:
        return build_basis(self.L, self.n, self.collocation_points)

    def replace(self, **changes) -> "SimConfig":
        if "n" in changes and "M" not in changes and self.M is not None:
            changes["M"] = default_M(changes["n"], self.potential.kind)
        return replace(self, **changes)


# -- states and trajectories -------------------------------------------------


@dataclass
class GalerkinState:
    t: float
    mu: np.ndarray
    nu: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        if not (len(self.mu) == len(self.nu) == len(self.phi)):
            raise DomainError("mu, nu and phi must share the basis dimension")


@dataclass
class Trajectory:
    """States at uniformly spaced times, stored as stacked arrays (steps+1, n)."""

    cfg: SimConfig
    times: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    phi: np.ndarray
    diagnostics: list = field(default_factory=list)

    @property
    def basis(self):
        return self.cfg.basis

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> GalerkinState:
        return GalerkinState(float(self.times[i]), self.mu[i], self.nu[i], self.phi[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def final(self) -> GalerkinState:
        return self[-1]

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else self.cfg.time_step


def check_admissible(p: SplitPotential, basis: SpectralBasis, phi0: np.ndarray, field="init.phi0"):
    """Raise ConfigError unless phi0 (coefficients) fits the potential's domain."""
    m0 = phi0[0] / math.sqrt(basis.L)
    if not p.is_interior(m0):
        raise ConfigError(
            f"mean of phi0 m0={m0:g} must lie in the interior of D(df1) "
            f"= ({p.r_minus}, {p.r_plus})", field)
    vals = synth(basis, phi0)
    if p.kind is PotentialKind.LOGARITHMIC and np.max(np.abs(vals)) >= 1.0 - LOG_ADMISSIBILITY_MARGIN:
        raise ConfigError("phi0 must take values inside (-1, 1) for the logarithmic potential", field)
    if p.kind is PotentialKind.DOUBLE_OBSTACLE and np.max(np.abs(vals)) > 1.0:
        raise ConfigError("phi0 must take values in [-1, 1] for the double obstacle potential", field)


def initial_state(cfg: SimConfig, basis: SpectralBasis | None = None) -> GalerkinState:
    basis = basis or cfg.basis
    phi = cfg.init.phi0.coeffs(basis)
    check_admissible(cfg.potential, basis, phi)
    return GalerkinState(0.0, cfg.init.mu0.coeffs(basis), cfg.init.nu0.coeffs(basis), phi)


# -- time stepping -----------------------------------------------------------


class _MidpointStepper:
    """Implicit midpoint on the linear skeleton with Picard-corrected N."""

    def __init__(self, cfg: SimConfig, basis: SpectralBasis, dt: float | None = None):
        self.cfg = cfg
        self.basis = basis
        h = cfg.time_step if dt is None else dt
        self.h = h
        lam = basis.lam
        self.a11 = cfg.alpha + 0.25 * h * h * lam
        self.a22 = cfg.tau + 0.5 * h * lam
        self.det = self.a11 * self.a22 + 0.25 * h * h

    def _solve(self, mu, nu, phi, N, gbar):
        h, lam = self.h, self.basis.lam
        mu_half = mu + 0.5 * h * nu
        b1 = -h * lam * mu_half
        b2 = h * (mu_half - lam * phi - N + gbar)
        dnu = (b1 * self.a22 - b2) / self.det
        dphi = (self.a11 * b2 + 0.25 * h * h * b1) / self.det
        if self.cfg.alpha > 0:
            # mode 1 (lam = 0): alpha dnu + dphi = 0 exactly
            dnu[0] = -dphi[0] / self.cfg.alpha
        return dnu, dphi

    def __call__(self, state: GalerkinState) -> GalerkinState:
        cfg, basis, h = self.cfg, self.basis, self.h
        mu, nu, phi = state.mu, state.nu, state.phi
        gbar = cfg.forcing.coeffs(basis, state.t + 0.5 * h)
        N = nonlinear_term(basis, phi, cfg.potential, cfg.yosida)
        dnu, dphi = self._solve(mu, nu, phi, N, gbar)
        for _ in range(cfg.picard_iters):
            N = nonlinear_term(basis, phi + 0.5 * dphi, cfg.potential, cfg.yosida)
            dnu, dphi = self._solve(mu, nu, phi, N, gbar)
        nu_new = nu + dnu
        mu_new = mu + h * (nu + 0.5 * dnu)
        return GalerkinState(state.t + h, mu_new, nu_new, phi + dphi)


def step(state: GalerkinState, cfg: SimConfig, basis: SpectralBasis | None = None) -> GalerkinState:
    """Advance one step of size cfg.time_step."""
    return _MidpointStepper(cfg, basis or cfg.basis)(state)


def solve(cfg: SimConfig, diagnostics: bool = True) -> Trajectory:
    """Integrate from t=0 to T and return the full trajectory."""
    from .diagnostics import compute_records

    cfg.require_hyperbolic()
    basis = cfg.basis
    state = initial_state(cfg, basis)
    K = cfg.nsteps
    h = cfg.time_step
    stepper = _MidpointStepper(cfg, basis, h)
    mu = np.empty((K + 1, basis.n))
    nu = np.empty_like(mu)
    phi = np.empty_like(mu)
    mu[0], nu[0], phi[0] = state.mu, state.nu, state.phi
    for i in range(K):
        state = stepper(state)
        # times as i*h avoid drift from repeated addition
        state.t = (i + 1) * h
        mu[i + 1], nu[i + 1], phi[i + 1] = state.mu, state.nu, state.phi
        if not np.all(np.isfinite(state.phi)):
            raise FloatingPointError(f"non-finite state at step {i + 1}")
    traj = Trajectory(cfg, h * np.arange(K + 1), mu, nu, phi)
    if diagnostics:
        traj.diagnostics = compute_records(traj)
    return traj


def terminal_vector(traj: Trajectory) -> np.ndarray:
    s = traj.final
    return np.concatenate([s.mu, s.nu, s.phi])


def estimate_temporal_order(cfg: SimConfig) -> float:
    """log2 of the ratio of terminal-state differences at dt, dt/2, dt/4.

    Returns NaN when either difference vanishes (e.g. zero data).
    """
    h = cfg.time_step
    if cfg.T / h < 8 - 1e-9:
        raise ConfigError("estimate_temporal_order needs T/dt >= 8", "dt")
    finals = [terminal_vector(solve(cfg.replace(dt=h / 2**j), diagnostics=False)) for j in range(3)]
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    if e1 == 0 or e2 == 0:
        return math.nan
    return math.log2(e1 / e2)
