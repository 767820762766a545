import math

import numpy as np
import pytest
from scipy.integrate import quad

from hrch.errors import ConfigError
from hrch.potentials import SplitPotential, YosidaParams
from hrch.solver import (
    Coeffs,
    CosineSeries,
    ForcingSpec,
    ForcingTerm,
    GalerkinState,
    InitSpec,
    Samples,
    SimConfig,
    estimate_temporal_order,
    initial_state,
    l2h_distance,
    solve,
    step,
    terminal_vector,
)
from hrch.spectral import project

from helpers import homogeneous, scalar_oracle, smooth_regular

REG = SplitPotential.regular()


def zero_cfg(**kw):
    base = dict(alpha=1.0, tau=1.0, yosida=YosidaParams(0.1), potential=REG, n=8, dt=0.01, T=0.1)
    base.update(kw)
    return SimConfig(**base)


def test_initial_state_examples():
    cfg = zero_cfg(init=InitSpec(phi0=CosineSeries(0.1)))
    s = initial_state(cfg)
    assert s.phi[0] == pytest.approx(0.1) and not np.any(s.phi[1:])
    assert not np.any(s.mu) and not np.any(s.nu)
    b = cfg.basis
    e2 = math.sqrt(2.0) * np.cos(math.pi * b.grid)
    s = initial_state(cfg.replace(init=InitSpec(phi0=Samples(tuple(e2)))))
    assert np.allclose(s.phi, np.eye(8)[1], rtol=0, atol=1e-12)
    s = initial_state(cfg.replace(init=InitSpec(phi0=Coeffs((0.1, 0.2)))))
    assert np.array_equal(s.phi, np.r_[0.1, 0.2, np.zeros(6)])


def test_initial_state_rejects_inadmissible():
    log = SplitPotential.logarithmic()
    with pytest.raises(ConfigError):
        initial_state(zero_cfg(potential=log, init=InitSpec(phi0=CosineSeries(1.5))))
    with pytest.raises(ConfigError):
        initial_state(zero_cfg(potential=log, init=InitSpec(phi0=CosineSeries(0.2, ((1, 0.9),)))))
    with pytest.raises(ConfigError):
        initial_state(zero_cfg(potential=SplitPotential.double_obstacle(), init=InitSpec(phi0=CosineSeries(1.0))))


def test_cosine_series_coefficients_match_projection():
    cfg = zero_cfg(L=2.0)
    src = CosineSeries(0.3, ((1, 0.2), (4, -0.1)))
    b = cfg.basis
    assert np.allclose(src.coeffs(b), project(b, src(b.grid, b.L)), rtol=0, atol=1e-14)


def test_forcing_coefficients_and_distance():
    g = ForcingSpec((ForcingTerm(0.5, 0, 1.0, 2.0), ForcingTerm(-0.3, 3, 0.0, 1.0)))
    b = zero_cfg(L=1.5).basis
    t = 0.37
    assert np.allclose(g.coeffs(b, t), project(b, g.values(b.grid, b.L, t)), rtol=0, atol=1e-14)
    h = ForcingSpec((ForcingTerm(0.1, 1, 1.0, 1.0),))
    T, L = 0.8, 1.5

    def sq(t):
        x = np.linspace(0, L, 20001)
        xm = 0.5 * (x[1:] + x[:-1])
        d = g.values(xm, L, t) - h.values(xm, L, t)
        return float(np.sum(d**2) * (x[1] - x[0]))

    oracle = math.sqrt(quad(sq, 0, T)[0])
    assert l2h_distance(g, h, L, T) == pytest.approx(oracle, rel=1e-8)
    assert l2h_distance(g, g, L, T) == 0.0


def test_config_validation():
    with pytest.raises(ConfigError, match=r"alpha must be in \(0,1\]"):
        solve(zero_cfg(alpha=0.0))
    with pytest.raises(ConfigError):
        zero_cfg(alpha=1.5)
    with pytest.raises(ConfigError):
        zero_cfg(tau=0.0)
    with pytest.raises(ConfigError):
        zero_cfg(dt=0.03)
    with pytest.raises(ConfigError):
        zero_cfg(dt=0.2)


def test_default_time_step():
    cfg = SimConfig(alpha=0.0001, tau=1.0, yosida=YosidaParams(0.1), potential=REG, T=1.0)
    assert cfg.time_step == pytest.approx(1e-3)
    cfg = SimConfig(alpha=0.5, tau=0.005, yosida=YosidaParams(0.1), potential=REG, T=1.0)
    assert cfg.time_step == pytest.approx(5e-4)
    cfg = SimConfig(alpha=0.5, tau=1.0, yosida=YosidaParams(0.1), potential=REG, T=0.35)
    assert cfg.time_step <= 1e-3 and cfg.nsteps * cfg.time_step == pytest.approx(0.35)


def test_zero_state_is_fixed_point():
    cfg = zero_cfg()
    s = initial_state(cfg)
    nxt = step(s, cfg)
    assert not np.any(nxt.mu) and not np.any(nxt.nu) and not np.any(nxt.phi)
    traj = solve(cfg)
    assert len(traj) == 11
    assert not np.any(traj.phi) and not np.any(traj.mu) and not np.any(traj.nu)
    assert np.allclose(traj.times, np.arange(11) * 0.01, rtol=0, atol=1e-15)


def test_state_shape_check():
    with pytest.raises(ValueError):
        GalerkinState(0.0, np.zeros(3), np.zeros(3), np.zeros(4))


def test_mode_one_invariant_every_step():
    cfg = smooth_regular(init=InitSpec(mu0=CosineSeries(0.2, ((1, 0.1),)), nu0=CosineSeries(0.4),
                                       phi0=CosineSeries(0.1, ((1, 0.3),))))
    s = initial_state(cfg)
    a = cfg.alpha
    q0 = a * s.nu[0] + s.phi[0]
    for _ in range(50):
        s = step(s, cfg)
        assert abs(a * s.nu[0] + s.phi[0] - q0) <= 1e-13


@pytest.mark.parametrize("dt", [1e-2, 5e-3])
def test_homogeneous_matches_scalar_oracle(dt):
    cfg = homogeneous(REG, 0.2, dt)
    traj = solve(cfg, diagnostics=False)
    sol = scalar_oracle(cfg)
    end = np.array([traj.mu[-1, 0], traj.nu[-1, 0], traj.phi[-1, 0]]) / math.sqrt(cfg.L)
    scale = np.max(np.abs(sol.sol(np.linspace(0, cfg.T, 201))))
    assert np.max(np.abs(end - sol.y[:, -1])) <= 10 * dt**2 * scale
    # higher modes stay zero
    assert np.max(np.abs(traj.phi[:, 1:])) <= 1e-15


def test_smooth_run_bounded_and_stable_under_halving():
    cfg = smooth_regular()
    sup = []
    for h in (2e-3, 1e-3):
        traj = solve(cfg.replace(dt=h), diagnostics=False)
        assert np.all(np.isfinite(traj.phi))
        lam = traj.basis.lam
        phi_t = np.diff(traj.phi, axis=0) / h
        sup.append(np.array([
            math.sqrt(cfg.alpha) * np.max(np.linalg.norm(traj.nu, axis=1)),
            np.max(np.sqrt(np.sum(lam * traj.mu**2, axis=1))),
            np.max(np.linalg.norm(phi_t, axis=1)),
            np.max(np.linalg.norm(traj.phi, axis=1)),
        ]))
    assert np.all(np.abs(sup[0] - sup[1]) <= 0.05 * sup[1])


def test_halving_dt_shrinks_terminal_difference_by_four():
    cfg = smooth_regular()
    finals = [terminal_vector(solve(cfg.replace(dt=2e-3 / 2**j), diagnostics=False)) for j in range(3)]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    assert 3.5 <= ratio <= 4.5


def test_temporal_order_linearized_regime():
    cfg = smooth_regular(init=InitSpec(phi0=CosineSeries(0.0, ((1, 1e-3),))), forcing=ForcingSpec(),
                         dt=4e-3)
    assert estimate_temporal_order(cfg) == pytest.approx(2.0, abs=0.2)


def test_picard_correctors():
    # without correctors the predictor N(phi^n) is first order
    cfg = smooth_regular(dt=4e-3)
    p0 = estimate_temporal_order(cfg.replace(picard_iters=0))
    p2 = estimate_temporal_order(cfg.replace(picard_iters=2))
    assert p0 == pytest.approx(1.0, abs=0.2)
    assert p2 == pytest.approx(2.0, abs=0.2)
    ref = terminal_vector(solve(cfg.replace(dt=5e-4), diagnostics=False))
    err = {k: np.linalg.norm(terminal_vector(solve(cfg.replace(picard_iters=k), diagnostics=False)) - ref)
           for k in (0, 1, 2)}
    assert err[2] <= err[1] < err[0]


def test_temporal_order_edge_cases():
    assert math.isnan(estimate_temporal_order(zero_cfg(T=0.08)))
    with pytest.raises(ConfigError):
        estimate_temporal_order(zero_cfg(T=0.05))


def test_determinism():
    cfg = smooth_regular()
    a, b = solve(cfg), solve(cfg)
    for name in ("mu", "nu", "phi", "times"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert [r.as_row() for r in a.diagnostics] == [r.as_row() for r in b.diagnostics]
