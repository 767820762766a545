"""Multi-run studies: alpha -> 0 rates, continuous dependence, eps and n refinement."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    separation_report,
    sup_laplacian_mu,
    trajectory_norms,
    yosida_linf_h,
)
from .errors import ConfigError, DomainError, SeparationError
from .potentials import YosidaParams
from .solver import Coeffs, ForcingSpec, InitSpec, SimConfig, l2h_distance, solve
from .vch import vch_solve


@dataclass
class PowerFit:
    exponent: float
    constant: float
    residual: float

    @property
    def degenerate(self):
        return not math.isfinite(self.exponent)


def fit_power_law(x, y) -> PowerFit:
    """Least-squares fit of log y = log K + p log x; residual is the RMS in log units."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(ok) < 2:
        return PowerFit(math.nan, math.nan, math.nan)
    lx, ly = np.log(x[ok]), np.log(y[ok])
    A = np.vstack([lx, np.ones_like(lx)]).T
    (p, logK), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (p * lx + logK)
    return PowerFit(float(p), float(math.exp(logK)), float(np.sqrt(np.mean(res**2))))


@dataclass
class SweepResult:
    parameter: str
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    # name of the fit reported as the headline rate
    primary: str | None = None

    @property
    def columns(self):
        return list(self.rows[0].keys()) if self.rows else [self.parameter]

    def column(self, name):
        return np.array([row[name] for row in self.rows], dtype=float)

    @property
    def values(self):
        return self.column(self.parameter)


def is_monotone_nonincreasing(values, rel_tol=0.02) -> bool:
    """values[i+1] <= values[i] (1 + rel_tol) for all i."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] * (1.0 + rel_tol) + 1e-300))


def _workers():
    try:
        return max(1, int(os.environ.get("HRCH_THREADS", "1")))
    except ValueError:
        return 1


def _run_all(fn, items):
    items = list(items)
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _common_dt(cfg: SimConfig, alphas) -> float:
    if cfg.dt is not None:
        return float(cfg.dt)
    h = min([1e-3, cfg.tau / 10.0] + [math.sqrt(a) / 10.0 for a in alphas])
    return cfg.T / math.ceil(cfg.T / h - 1e-9)


def _strictly_decreasing(v):
    return all(b < a for a, b in zip(v, v[1:]))


ALPHA_FIT_COLUMNS = (
    "sqrt_alpha_mu_linf_h",
    "grad_int_mu_diff_linf_h",
    "phi_diff_linf_h",
    "phi_diff_l2_v",
    "phi_diff_linf_h_l2_v",
    "total_error",
    "sup_laplacian_mu",
)


def alpha_sweep(cfg_base: SimConfig, alphas, g_drift: ForcingSpec | None = None,
                drift_power: float = 0.25) -> SweepResult:
    """Compare the hyperbolic runs at each alpha with the alpha = 0 limit.

    With ``g_drift`` the forcing of the alpha-run becomes
    ``g + alpha**drift_power * g_drift`` so that ||g_alpha - g|| enters.
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) < 4 or not _strictly_decreasing(alphas) or not all(0 < a <= 1 for a in alphas):
        raise ConfigError("alphas must be >= 4 strictly decreasing values in (0,1]", "sweep.alphas")
    dt = _common_dt(cfg_base, alphas)
    base = cfg_base.replace(dt=dt)
    limit = vch_solve(base)
    T, L = base.T, base.L

    def run(a):
        g = base.forcing
        if g_drift is not None:
            g = g + g_drift.scaled(a**drift_power)
        traj = solve(base.replace(alpha=a, forcing=g), diagnostics=False)
        nb = trajectory_norms(traj, limit)
        mu_norm = math.sqrt(a) * float(np.sqrt(np.max(np.sum(traj.mu**2, axis=1))))
        row = {
            "alpha": a,
            "sqrt_alpha_mu_linf_h": mu_norm,
            "grad_int_mu_diff_linf_h": nb.grad_int_mu_linf_h,
            "phi_diff_linf_h": nb.phi_linf_h,
            "phi_diff_l2_v": nb.phi_l2_v,
            "phi_diff_linf_h_l2_v": nb.phi_linf_h_l2_v,
            "total_error": mu_norm + nb.grad_int_mu_linf_h + nb.phi_linf_h_l2_v,
            "g_diff_l2_h": l2h_distance(g, base.forcing, L, T),
            "sup_laplacian_mu": sup_laplacian_mu(traj),
        }
        return row

    result = SweepResult("alpha", _run_all(run, alphas))
    x = result.values
    for name in ALPHA_FIT_COLUMNS:
        result.fits[name] = fit_power_law(x, result.column(name))
    result.extras["dt"] = dt
    result.primary = "phi_diff_linf_h_l2_v"
    return result


@dataclass(frozen=True)
class DataPerturbation:
    """Direction of a data perturbation; the run at magnitude d adds d times it."""

    g: ForcingSpec | None = None
    mu0: object = None
    nu0: object = None
    phi0: object = None


def _perturbed(cfg: SimConfig, pert: DataPerturbation, d: float):
    basis = cfg.basis
    fields_ = {}
    diffs = {}
    for name in ("mu0", "nu0", "phi0"):
        base_c = getattr(cfg.init, name).coeffs(basis)
        src = getattr(pert, name)
        delta = src.coeffs(basis) * d if src is not None else np.zeros(basis.n)
        diffs[name] = delta
        fields_[name] = Coeffs(tuple(base_c + delta))
    g = cfg.forcing if pert.g is None else cfg.forcing + pert.g.scaled(d)
    new = cfg.replace(init=InitSpec(**fields_), forcing=g)
    return new, diffs, l2h_distance(g, cfg.forcing, cfg.L, cfg.T)


def _check_magnitudes(magnitudes):
    mags = sorted({float(m) for m in magnitudes}, reverse=True)
    pos = [m for m in mags if m > 0]
    if len(pos) < 4 or pos[0] / pos[-1] < 100 * (1 - 1e-12):
        raise ConfigError("need >= 4 positive magnitudes spanning >= 2 decades", "sweep.magnitudes")
    if any(m < 0 for m in mags):
        raise ConfigError("magnitudes must be nonnegative", "sweep.magnitudes")
    return mags


def _dependence(cfg_base, pert, magnitudes, strong):
    mags = _check_magnitudes(magnitudes)
    alpha = cfg_base.alpha
    lam = cfg_base.basis.lam
    base_traj = solve(cfg_base, diagnostics=False)
    if strong:
        rep = separation_report(base_traj)
        if not rep.passed:
            raise SeparationError("base run fails the separation check")

    def run(d):
        if d == 0:
            traj, diffs, gdiff = base_traj, None, 0.0
        else:
            cfg, diffs, gdiff = _perturbed(cfg_base, pert, d)
            traj = solve(cfg, diagnostics=False)
            if strong and not separation_report(traj).passed:
                raise SeparationError(f"perturbed run (magnitude {d:g}) fails the separation check")
        nb = trajectory_norms(base_traj, traj)
        if diffs is None:
            rhs = 0.0
        else:
            hn = lambda c: float(np.linalg.norm(c))
            vn = lambda c: float(np.sqrt(np.sum((1.0 + lam) * c**2)))
            if strong:
                rhs = gdiff + vn(diffs["mu0"]) + hn(diffs["nu0"]) + vn(diffs["phi0"])
            else:
                sa = math.sqrt(alpha)
                rhs = (gdiff + sa * hn(diffs["mu0"]) + sa * hn(diffs["nu0"])
                       + (1.0 + 1.0 / sa) * hn(diffs["phi0"]))
        lhs = nb.strong_lhs if strong else nb.weak_lhs
        return {"magnitude": d, "lhs": lhs, "rhs": rhs,
                "ratio": lhs / rhs if rhs > 0 else math.nan}

    result = SweepResult("magnitude", _run_all(run, mags))
    result.fits["lhs"] = fit_power_law(result.values, result.column("lhs"))
    result.primary = "lhs"
    ratios = result.column("ratio")
    finite = ratios[np.isfinite(ratios)]
    key = "K4" if strong else "K2"
    result.extras[key] = float(np.max(finite)) if finite.size else math.nan
    result.extras["ratio_spread"] = float(np.max(finite) / np.min(finite)) if finite.size else math.nan
    result.extras["alpha"] = alpha
    return result


def continuous_dependence(cfg_base: SimConfig, perturbation: DataPerturbation, magnitudes) -> SweepResult:
    """Lipschitz dependence of the solution on (g, mu0, nu0, phi0)."""
    return _dependence(cfg_base, perturbation, magnitudes, strong=False)


def continuous_dependence_strong(cfg_base: SimConfig, perturbation: DataPerturbation, magnitudes) -> SweepResult:
    """Refined dependence in stronger norms; needs separated open-domain runs."""
    if not cfg_base.potential.has_open_domain:
        raise DomainError("strong continuous dependence needs the regular or logarithmic potential")
    return _dependence(cfg_base, perturbation, magnitudes, strong=True)


def epsilon_sweep(cfg_base: SimConfig, epsilons) -> SweepResult:
    eps = [float(e) for e in epsilons]
    if not eps or not _strictly_decreasing(eps):
        raise ConfigError("epsilons must be a strictly decreasing list", "sweep.epsilons")
    y = cfg_base.yosida
    trajs = _run_all(lambda e: solve(cfg_base.replace(
        yosida=YosidaParams(e, y.newton_tol, y.newton_max_iters)), diagnostics=False), eps)
    rows = []
    for i, (e, tr) in enumerate(zip(eps, trajs)):
        if i + 1 < len(trajs):
            d = float(np.sqrt(np.max(np.sum((tr.phi - trajs[i + 1].phi) ** 2, axis=1))))
        else:
            d = math.nan
        rows.append({"epsilon": e, "cauchy_diff_linf_h": d, "yosida_linf_h": yosida_linf_h(tr)})
    result = SweepResult("epsilon", rows)
    if len(rows) >= 3:
        result.fits["cauchy_diff_linf_h"] = fit_power_law(result.values[:-1], result.column("cauchy_diff_linf_h")[:-1])
        result.primary = "cauchy_diff_linf_h"
    return result


def n_refinement(cfg_base: SimConfig, ns) -> SweepResult:
    ns = [int(n) for n in ns]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("ns must be strictly increasing", "sweep.ns")

    def cfg_for(n):
        if cfg_base.M is None:
            M = None
        else:
            M = max(2 * n, int(round(cfg_base.M * n / cfg_base.n)))
        return cfg_base.replace(n=n, M=M)

    trajs = _run_all(lambda n: solve(cfg_for(n), diagnostics=False), ns)
    rows = []
    for i, (n, tr) in enumerate(zip(ns, trajs)):
        if i + 1 < len(trajs):
            nxt = trajs[i + 1].final.phi
            cur = np.zeros_like(nxt)
            cur[:n] = tr.final.phi
            d = float(np.linalg.norm(cur - nxt))
        else:
            d = math.nan
        rows.append({"n": n, "terminal_diff_h": d})
    return SweepResult("n", rows)
