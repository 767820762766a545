"""Functionals, identity residuals and norms evaluated along trajectories.

Time derivatives at the stored nodes use second-order differences
(centered inside, one-sided three-point at the ends).  Space-time
integrals over a step use midpoint (secant) forms, e.g. the f'' weighted
dissipation over ``(t_i, t_{i+1})`` is
``sum_m w_m (F(phi^{i+1}_m) - F(phi^i_m)) (phi^{i+1}_m - phi^i_m) / dt``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import DomainError, ShapeError
from .potentials import yosida_f1eps, yosida_prime
from .solver import SimConfig, Trajectory
from .spectral import synth
from .vch import VchTrajectory


@dataclass
class DiagnosticsRecord:
    t: float
    mass_residual: float
    energy: float
    cumulative_dissipation: float
    phi_min: float
    phi_max: float
    xi_proxy_supnorm: float
    grad_mu_norm: float
    laplacian_mu_norm: float

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return list(asdict(self).values())


def time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    if len(values) < 3:
        return np.gradient(values, dt, axis=0) if len(values) > 1 else np.zeros_like(values)
    return np.gradient(values, dt, axis=0, edge_order=2)


def _grid(traj) -> np.ndarray:
    return synth(traj.basis, traj.phi)


def mass_history(traj: Trajectory) -> np.ndarray:
    """|alpha mean(nu) + mean(phi) - (alpha mean(nu0) + m0)| at every node."""
    rootL = math.sqrt(traj.basis.L)
    alpha = traj.cfg.alpha
    q = alpha * traj.nu[:, 0] / rootL + traj.phi[:, 0] / rootL
    return np.abs(q - q[0])


def mass_invariant_residual(traj: Trajectory, cfg: SimConfig | None = None) -> float:
    return float(np.max(mass_history(traj)))


def energy_history(traj: Trajectory) -> np.ndarray:
    """alpha/2 ||mu_t||^2 + 1/2 ||grad mu||^2 + tau/2 ||phi_t||^2 at each node."""
    cfg, lam = traj.cfg, traj.basis.lam
    phi_t = time_derivative(traj.phi, traj.dt)
    return (0.5 * cfg.alpha * np.sum(traj.nu**2, axis=1)
            + 0.5 * np.sum(lam * traj.mu**2, axis=1)
            + 0.5 * cfg.tau * np.sum(phi_t**2, axis=1))


def _step_integrals(traj: Trajectory):
    """Per-step dissipation and right-hand-side work of the energy identity."""
    cfg, basis, h = traj.cfg, traj.basis, traj.dt
    w = basis.weights
    grid = _grid(traj)
    dgrid = np.diff(grid, axis=0)
    dphi = np.diff(traj.phi, axis=0)
    dF1 = np.diff(yosida_prime(cfg.potential, cfg.yosida, grid), axis=0)
    dF2 = np.diff(cfg.potential.f2_prime(grid), axis=0)
    g = np.array([cfg.forcing.coeffs(basis, t) for t in traj.times])
    dg = np.diff(g, axis=0)
    grad_term = np.sum(basis.lam * dphi**2, axis=1) / h
    f1_term = np.sum(w * dF1 * dgrid, axis=1) / h
    f2_term = np.sum(w * dF2 * dgrid, axis=1) / h
    g_term = np.sum(dg * dphi, axis=1) / h
    return grad_term + f1_term, -f2_term + g_term


def _cumulative(per_step):
    return np.concatenate([[0.0], np.cumsum(per_step)])


def energy_balance_history(traj: Trajectory) -> np.ndarray:
    """E(t) + D(0,t) - E(0) - R(0,t) at every node."""
    if len(traj) < 3:
        raise ShapeError("energy balance needs at least 3 states")
    E = energy_history(traj)
    diss, work = _step_integrals(traj)
    return E + _cumulative(diss) - E[0] - _cumulative(work)


def energy_balance_residual(traj: Trajectory, cfg: SimConfig | None = None) -> float:
    return float(np.max(np.abs(energy_balance_history(traj))))


def compute_records(traj: Trajectory) -> list:
    cfg, basis = traj.cfg, traj.basis
    grid = _grid(traj)
    mass = mass_history(traj)
    E = energy_history(traj) if len(traj) > 1 else np.zeros(len(traj))
    D = _cumulative(_step_integrals(traj)[0]) if len(traj) > 1 else np.zeros(1)
    xi = np.max(np.abs(yosida_prime(cfg.potential, cfg.yosida, grid)), axis=1)
    gmu = np.sqrt(np.sum(basis.lam * traj.mu**2, axis=1))
    lmu = np.sqrt(np.sum((basis.lam * traj.mu) ** 2, axis=1))
    return [
        DiagnosticsRecord(float(t), float(mass[i]), float(E[i]), float(D[i]),
                          float(grid[i].min()), float(grid[i].max()), float(xi[i]),
                          float(gmu[i]), float(lmu[i]))
        for i, t in enumerate(traj.times)
    ]


# -- viscous Cahn-Hilliard energy -------------------------------------------


def vch_energy(traj: VchTrajectory) -> np.ndarray:
    """1/2 ||grad phi||^2 + int f_eps(phi) with f_eps = f_{1,eps} + f2."""
    cfg, basis = traj.cfg, traj.basis
    grid = synth(basis, traj.phi)
    bulk = yosida_f1eps(cfg.potential, cfg.yosida, grid) + cfg.potential.f2(grid)
    return 0.5 * np.sum(basis.lam * traj.phi**2, axis=1) + bulk @ basis.weights


def vch_dissipation_residuals(traj: VchTrajectory) -> np.ndarray:
    """Per-step Delta E + dt (||grad mu||^2 + tau ||phi_t||^2); <= O(dt^2) when g = 0."""
    cfg, basis, h = traj.cfg, traj.basis, traj.dt
    E = vch_energy(traj)
    mu = traj.mu[1:]
    phi_t = np.diff(traj.phi, axis=0) / h
    diss = np.sum(basis.lam * mu**2, axis=1) + cfg.tau * np.sum(phi_t**2, axis=1)
    return np.diff(E) + h * diss


# -- separation --------------------------------------------------------------


@dataclass
class SeparationReport:
    r_star: float
    r_star_upper: float
    sup_f1prime: float
    initial_f1prime: float
    h_supnorm: float
    bound_rhs: float
    slack: float
    margin: float
    passed: bool


def separation_report(traj: Trajectory, cfg: SimConfig | None = None) -> SeparationReport:
    """Grid extrema of phi and the sup-norm bound on f1'(phi)."""
    cfg = traj.cfg
    p, basis = cfg.potential, traj.basis
    if not p.has_open_domain:
        raise DomainError("separation report needs an open-domain potential (regular or logarithmic)")
    grid = _grid(traj)
    r_lo, r_hi = float(grid.min()), float(grid.max())
    inside = p.r_minus < r_lo and r_hi < p.r_plus
    if inside:
        sup_f1 = float(np.max(np.abs(p.f1_prime(grid))))
    else:
        sup_f1 = math.inf
    init_f1 = float(np.max(np.abs(p.f1_prime(grid[0]))))
    mu_grid = synth(basis, traj.mu)
    g_grid = np.array([cfg.forcing.values(basis.grid, basis.L, t) for t in traj.times])
    h = mu_grid + g_grid - p.f2_prime(grid)
    h_sup = float(np.max(np.abs(h)))
    bound = init_f1 + h_sup
    slack = 0.1 * bound + traj.dt
    margin = min(r_lo - p.r_minus, p.r_plus - r_hi)
    return SeparationReport(r_lo, r_hi, sup_f1, init_f1, h_sup, bound, slack, margin,
                            bool(inside and sup_f1 <= bound + slack))


# -- norms of trajectory differences ----------------------------------------


@dataclass
class NormBundle:
    sqrt_alpha_mu_linf_h: float
    grad_int_mu_linf_h: float
    phi_linf_h: float
    phi_l2_v: float
    # strong (refined continuous dependence) bundle
    mu_w1inf_h: float
    mu_linf_v: float
    mu_h2_vstar: float
    phi_h1_h: float
    phi_linf_v: float
    phi_l2_w: float

    @property
    def phi_linf_h_l2_v(self):
        return self.phi_linf_h + self.phi_l2_v

    @property
    def weak_lhs(self):
        return self.sqrt_alpha_mu_linf_h + self.grad_int_mu_linf_h + self.phi_linf_h_l2_v

    @property
    def strong_lhs(self):
        return (self.mu_h2_vstar + self.mu_w1inf_h + self.mu_linf_v
                + self.phi_h1_h + self.phi_linf_v + self.phi_l2_w)


def mu_time_integral(traj) -> np.ndarray:
    """Coefficients of (1 * mu)(t) = int_0^t mu at every node."""
    if isinstance(traj, VchTrajectory):
        # staggered step values: midpoint sum, exact for the CN scheme
        return _cumulative_rows(traj.dt * traj.mu[1:], traj.basis.n)
    return cumulative_trapezoid(traj.mu, dx=traj.dt, axis=0, initial=0.0)


def _cumulative_rows(rows, n):
    return np.vstack([np.zeros(n), np.cumsum(rows, axis=0)])


def _nu(traj):
    if isinstance(traj, VchTrajectory):
        # mu_t of the limit system, from the staggered values
        return time_derivative(mu_nodes(traj), traj.dt)
    return traj.nu


def mu_nodes(traj) -> np.ndarray:
    """Chemical potential at the time nodes (averages staggered values)."""
    if not isinstance(traj, VchTrajectory):
        return traj.mu
    mu = traj.mu.copy()
    mu[1:-1] = 0.5 * (traj.mu[1:-1] + traj.mu[2:])
    return mu


def trajectory_norms(trajA, trajB, cfg: SimConfig | None = None) -> NormBundle:
    if trajA.basis.n != trajB.basis.n or trajA.basis.L != trajB.basis.L:
        raise ShapeError("trajectories live in different bases")
    if trajA.times.shape != trajB.times.shape or not np.allclose(trajA.times, trajB.times, rtol=0, atol=1e-12):
        raise ShapeError("trajectories use different time grids")
    lam = trajA.basis.lam
    h = trajA.dt
    alpha = trajA.cfg.alpha
    dmu = mu_nodes(trajA) - mu_nodes(trajB)
    dnu = _nu(trajA) - _nu(trajB)
    dphi = trajA.phi - trajB.phi
    dint = mu_time_integral(trajA) - mu_time_integral(trajB)
    dphi_t = time_derivative(dphi, h) if len(dphi) > 1 else np.zeros_like(dphi)
    dnu_t = time_derivative(dnu, h) if len(dnu) > 1 else np.zeros_like(dnu)

    def linf(weighted_sq):
        return float(np.sqrt(np.max(weighted_sq)))

    def l2(weighted_sq):
        if len(weighted_sq) < 2:
            return 0.0
        return float(np.sqrt(trapezoid(weighted_sq, dx=h)))

    sq = lambda a, wgt=1.0: np.sum(wgt * a**2, axis=1)
    vstar = 1.0 / (1.0 + lam)
    return NormBundle(
        sqrt_alpha_mu_linf_h=math.sqrt(alpha) * linf(sq(dmu)),
        grad_int_mu_linf_h=linf(sq(dint, lam)),
        phi_linf_h=linf(sq(dphi)),
        phi_l2_v=l2(sq(dphi, 1.0 + lam)),
        mu_w1inf_h=linf(sq(dmu)) + linf(sq(dnu)),
        mu_linf_v=linf(sq(dmu, 1.0 + lam)),
        mu_h2_vstar=l2(sq(dmu, vstar) + sq(dnu, vstar) + sq(dnu_t, vstar)),
        phi_h1_h=l2(sq(dphi) + sq(dphi_t)),
        phi_linf_v=linf(sq(dphi, 1.0 + lam)),
        phi_l2_w=l2(sq(dphi, (1.0 + lam) ** 2)),
    )


def sup_laplacian_mu(traj: Trajectory) -> float:
    return float(np.sqrt(np.max(np.sum((traj.basis.lam * traj.mu) ** 2, axis=1))))


def yosida_linf_h(traj) -> float:
    """max_t ||f'_{1,eps}(phi(t))||_H (grid quadrature)."""
    cfg, basis = traj.cfg, traj.basis
    vals = yosida_prime(cfg.potential, cfg.yosida, synth(basis, traj.phi))
    return float(np.sqrt(np.max(vals**2 @ basis.weights)))
