"""Command line entry point: ``hrch <subcommand> --config <path> --out <dir>``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import SUBCOMMANDS, RunConfig, parse_config
from .diagnostics import energy_balance_residual, mass_invariant_residual
from .errors import ConfigError, ConvergenceError, HrchError, IoError
from .experiments import (
    alpha_sweep,
    continuous_dependence,
    continuous_dependence_strong,
    epsilon_sweep,
    n_refinement,
)
from .io import Table, emit_csv, emit_svg_plots
from .potentials import (
    PotentialKind,
    YosidaParams,
    check_yosida_properties,
    zelik_constants,
    zelik_violations,
)
from .solver import solve
from .vch import vch_solve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

_SAMPLE_RANGES = {
    PotentialKind.REGULAR: (-3.0, 3.0),
    PotentialKind.LOGARITHMIC: (-0.99, 0.99),
    PotentialKind.DOUBLE_OBSTACLE: (-2.0, 2.0),
}


def _fmt(x):
    return f"{x:.6g}"


def _run_solve(rc: RunConfig, out: Path, plots: bool) -> int:
    traj = solve(rc.sim)
    emit_csv(traj, out / "trajectory.csv")
    if plots:
        emit_svg_plots(traj, out)
    print(f"steps={len(traj) - 1} dt={_fmt(traj.dt)} "
          f"mass_residual={_fmt(mass_invariant_residual(traj))} "
          f"energy_balance_residual={_fmt(energy_balance_residual(traj))}")
    return EXIT_OK


def _run_vch(rc: RunConfig, out: Path, plots: bool) -> int:
    traj = vch_solve(rc.sim)
    emit_csv(traj, out / "vch_trajectory.csv")
    if plots:
        emit_svg_plots(traj, out)
    print(f"steps={len(traj) - 1} dt={_fmt(traj.dt)}")
    return EXIT_OK


def _report_sweep(result, out: Path, name: str, plots: bool) -> int:
    emit_csv(result, out / f"{name}.csv")
    if plots:
        emit_svg_plots(result, out)
    for key, fit in result.fits.items():
        print(f"{key}: p={_fmt(fit.exponent)} K={_fmt(fit.constant)} residual={_fmt(fit.residual)}")
    for key, value in result.extras.items():
        if isinstance(value, float):
            print(f"{key}={_fmt(value)}")
    return EXIT_OK


def _run_yosida_check(rc: RunConfig, out: Path, plots: bool) -> int:
    ex = rc.extras
    p = rc.potential
    lo, hi = ex["range"] or _SAMPLE_RANGES[p.kind]
    samples = np.linspace(lo, hi, ex["samples"])
    prop_rows, zelik_rows = [], []
    ok = True
    for eps in ex["epsilons"]:
        y = YosidaParams(eps, rc.yosida.newton_tol, rc.yosida.newton_max_iters)
        report = check_yosida_properties(p, y, samples, tol=ex["tol"])
        for name, res in report.results.items():
            prop_rows.append([eps, name, res.passed, res.worst_violation])
        ok &= report.passed
        print(f"eps={_fmt(eps)}\n{report.summary()}")
        for m0 in ex["m0"]:
            delta0, C0 = zelik_constants(p, y, m0, samples)
            bad = zelik_violations(p, y, m0, samples, delta0, C0)
            ok &= bad == 0 and delta0 > 0
            zelik_rows.append([eps, m0, delta0, C0, bad])
    emit_csv(Table(["epsilon", "property", "passed", "worst_violation"], prop_rows),
             out / "yosida_properties.csv")
    emit_csv(Table(["epsilon", "m0", "delta0", "C0", "violations"], zelik_rows), out / "zelik.csv")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _dispatch(rc: RunConfig, out: Path, plots: bool) -> int:
    ex = rc.extras
    cmd = rc.subcommand
    if cmd == "solve":
        return _run_solve(rc, out, plots)
    if cmd == "vch":
        return _run_vch(rc, out, plots)
    if cmd == "yosida-check":
        return _run_yosida_check(rc, out, plots)
    if cmd == "sweep-alpha":
        res = alpha_sweep(rc.sim, ex["alphas"], ex.get("g_drift"), ex["drift_power"])
        return _report_sweep(res, out, "sweep_alpha", plots)
    if cmd == "contdep":
        res = continuous_dependence(rc.sim, ex["perturbation"], ex["magnitudes"])
        return _report_sweep(res, out, "contdep", plots)
    if cmd == "contdep-strong":
        res = continuous_dependence_strong(rc.sim, ex["perturbation"], ex["magnitudes"])
        return _report_sweep(res, out, "contdep_strong", plots)
    if cmd == "sweep-eps":
        return _report_sweep(epsilon_sweep(rc.sim, ex["epsilons"]), out, "sweep_eps", plots)
    if cmd == "refine-n":
        return _report_sweep(n_refinement(rc.sim, ex["ns"]), out, "refine_n", plots)
    raise ConfigError(f"unknown subcommand {cmd!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hrch", description="Spectral-Galerkin simulator for the "
                                 "hyperbolically relaxed viscous Cahn-Hilliard system.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="TOML config with dotted keys")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--no-plots", action="store_true", help="skip SVG output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        rc = parse_config(args.config, args.subcommand)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create output directory {out}: {exc}") from exc
        return _dispatch(rc, out, not args.no_plots)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, FloatingPointError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except IoError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HrchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
