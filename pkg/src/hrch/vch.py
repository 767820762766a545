"""Viscous Cahn-Hilliard limit (alpha = 0) in the same cosine basis.

Eliminating mu from ``phi_k' = -lam_k mu_k`` gives, for ``k >= 2``::

    (tau + 1/lam_k) phi_k' = -lam_k phi_k - N_k(phi) + g_k

which is advanced by Crank-Nicolson with the same predictor/Picard
treatment of N as the hyperbolic solver.  The mean of phi is frozen and
``mu_1 = N_1 - g_1``.  The chemical potential stored at ``times[i]`` for
``i >= 1`` is the one of the step ``(times[i-1], times[i])``, recovered
from the difference quotient ``mu_k = -(phi_k^{i} - phi_k^{i-1}) / (dt lam_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import SimConfig, check_admissible
from .spectral import SpectralBasis, nonlinear_term


@dataclass
class VchState:
    t: float
    phi: np.ndarray
    mu: np.ndarray


@dataclass
class VchTrajectory:
    cfg: SimConfig
    times: np.ndarray
    phi: np.ndarray
    mu: np.ndarray

    @property
    def basis(self):
        return self.cfg.basis

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return VchState(float(self.times[i]), self.phi[i], self.mu[i])

    @property
    def final(self):
        return self[-1]

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])


def _node_mu(cfg: SimConfig, basis: SpectralBasis, phi, t):
    """Chemical potential of the semi-discrete system at a time node."""
    N = nonlinear_term(basis, phi, cfg.potential, cfg.yosida)
    g = cfg.forcing.coeffs(basis, t)
    lam = basis.lam
    mu = (lam * phi + N - g) / (1.0 + cfg.tau * lam)
    mu[0] = N[0] - g[0]
    return mu


class _CNStepper:
    def __init__(self, cfg: SimConfig, basis: SpectralBasis, dt: float | None = None):
        self.cfg, self.basis = cfg, basis
        h = cfg.time_step if dt is None else dt
        self.h = h
        lam = basis.lam.copy()
        lam[0] = 1.0  # placeholder, mode 1 is handled separately
        self.lam = lam
        self.denom = (cfg.tau + 1.0 / lam) / h + 0.5 * lam

    def _increment(self, phi, N, gbar):
        dphi = (-self.lam * phi - N + gbar) / self.denom
        dphi[0] = 0.0
        return dphi

    def __call__(self, state: VchState) -> VchState:
        cfg, basis, h = self.cfg, self.basis, self.h
        phi = state.phi
        gbar = cfg.forcing.coeffs(basis, state.t + 0.5 * h)
        N = nonlinear_term(basis, phi, cfg.potential, cfg.yosida)
        dphi = self._increment(phi, N, gbar)
        for _ in range(cfg.picard_iters):
            N = nonlinear_term(basis, phi + 0.5 * dphi, cfg.potential, cfg.yosida)
            dphi = self._increment(phi, N, gbar)
        mu = -dphi / (h * self.lam)
        mu[0] = N[0] - gbar[0]
        return VchState(state.t + h, phi + dphi, mu)


def vch_initial_state(cfg: SimConfig, basis: SpectralBasis | None = None) -> VchState:
    basis = basis or cfg.basis
    phi = cfg.init.phi0.coeffs(basis)
    check_admissible(cfg.potential, basis, phi)
    return VchState(0.0, phi, _node_mu(cfg, basis, phi, 0.0))


def vch_step(state: VchState, cfg: SimConfig, basis: SpectralBasis | None = None) -> VchState:
    return _CNStepper(cfg, basis or cfg.basis)(state)


def vch_solve(cfg: SimConfig) -> VchTrajectory:
    """Integrate the alpha = 0 system; cfg.alpha, mu0 and nu0 are ignored."""
    basis = cfg.basis
    state = vch_initial_state(cfg, basis)
    K, h = cfg.nsteps, cfg.time_step
    stepper = _CNStepper(cfg, basis, h)
    phi = np.empty((K + 1, basis.n))
    mu = np.empty_like(phi)
    phi[0], mu[0] = state.phi, state.mu
    for i in range(K):
        state = stepper(state)
        state.t = (i + 1) * h
        phi[i + 1], mu[i + 1] = state.phi, state.mu
        if not np.all(np.isfinite(state.phi)):
            raise FloatingPointError(f"non-finite state at step {i + 1}")
    return VchTrajectory(cfg, h * np.arange(K + 1), phi, mu)
