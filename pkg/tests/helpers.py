"""Benchmark configurations and independent oracles shared by the tests."""
import math

import numpy as np
from scipy.integrate import solve_ivp

from hrch.potentials import SplitPotential, YosidaParams, yosida_prime
from hrch.solver import CosineSeries, ForcingSpec, ForcingTerm, InitSpec, SimConfig

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []

SMOOTH_PHI0 = CosineSeries(0.1, ((1, 0.3), (2, 0.1)))
SMOOTH_G = ForcingSpec((ForcingTerm(0.2, 1, 1.0, 1.0),))


def smooth_regular(**changes) -> SimConfig:
    """Smooth regular-potential benchmark (alpha=0.5, tau=1, eps=0.05, n=32)."""
    cfg = SimConfig(alpha=0.5, tau=1.0, yosida=YosidaParams(0.05), potential=SplitPotential.regular(),
                    L=1.0, n=32, dt=2e-3, T=0.5, forcing=SMOOTH_G, init=InitSpec(phi0=SMOOTH_PHI0))
    return cfg.replace(**changes) if changes else cfg


def alpha_base() -> SimConfig:
    return SimConfig(alpha=1.0, tau=1.0, yosida=YosidaParams(0.05), potential=SplitPotential.regular(),
                     L=1.0, n=16, T=1.0, forcing=SMOOTH_G, init=InitSpec(phi0=SMOOTH_PHI0))


def log_separation() -> SimConfig:
    """Logarithmic benchmark with phi0 in [-0.5, 0.5] and moderate forcing."""
    return SimConfig(alpha=0.5, tau=1.0, yosida=YosidaParams(0.01), potential=SplitPotential.logarithmic(2.0),
                     L=1.0, n=32, dt=2e-3, T=0.5,
                     forcing=ForcingSpec((ForcingTerm(0.5, 2, 1.0, 0.0),)),
                     init=InitSpec(phi0=CosineSeries(0.0, ((1, 0.4), (3, 0.1)))))


def homogeneous(potential, m0, dt, eps=0.05, L=1.0, T=1.0) -> SimConfig:
    return SimConfig(alpha=0.5, tau=1.0, yosida=YosidaParams(eps), potential=potential, L=L, n=4, dt=dt, T=T,
                     forcing=ForcingSpec((ForcingTerm(0.3, 0, 1.0, 1.0),)),
                     init=InitSpec(mu0=CosineSeries(0.5), nu0=CosineSeries(-0.3), phi0=CosineSeries(m0)))


# -- oracles -------------------------------------------------------------------


def bisect_root(fun, lo, hi, tol=1e-15, iters=400):
    """Plain bisection for an increasing function with fun(lo) < 0 < fun(hi)."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo < tol:
            break
        if fun(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scalar_oracle(cfg: SimConfig):
    """Adaptive RK4(5) integration of the mean-value ODEs for homogeneous data.

    alpha M'' + P' = 0,  tau P' + F(P) = M + g(t), with M, V = M', P the means.
    """
    p, y, a, tau = cfg.potential, cfg.yosida, cfg.alpha, cfg.tau

    def g(t):
        return sum(term.amplitude * (term.time_c0 + term.time_c1 * t) for term in cfg.forcing.terms if term.mode == 0)

    def rhs(t, u):
        M, V, P = u
        dP = (M + g(t) - float(yosida_prime(p, y, P)) - float(p.f2_prime(P))) / tau
        return [V, -dP / a, dP]

    means = [float(src.mean) for src in (cfg.init.mu0, cfg.init.nu0, cfg.init.phi0)]
    return solve_ivp(rhs, (0.0, cfg.T), means, method="RK45", rtol=1e-12, atol=1e-14, dense_output=True)


def dense_coefficients(fun, L, n, points=10_000_000, chunk=1_000_000):
    """Cosine coefficients of fun on (0, L) by a dense midpoint rule, one mode at a time."""
    out = np.zeros(n)
    h = L / points
    for start in range(0, points, chunk):
        x = (np.arange(start, min(points, start + chunk)) + 0.5) * h
        fx = fun(x)
        for k in range(n):
            ek = np.full_like(x, 1.0 / math.sqrt(L)) if k == 0 else math.sqrt(2.0 / L) * np.cos(k * np.pi * x / L)
            out[k] += h * float(np.dot(fx, ek))
    return out
