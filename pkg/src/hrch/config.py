"""Run configuration files.

Configs are TOML documents written with dotted keys, e.g.::

    alpha = 0.5
    tau = 1.0
    dt = 1e-3
    T = 0.5
    yosida.epsilon = 0.01
    basis.n = 32
    potential.kind = "regular"
    forcing.term1.amplitude = 0.2
    forcing.term1.mode = 1
    init.phi0.kind = "constant"
    init.phi0.value = 0.1

Every key is checked; unknown keys are rejected so that typos do not pass
silently.  Errors carry the dotted path of the offending field.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, HrchError
from .potentials import PotentialKind, SplitPotential, YosidaParams
from .solver import (
    Coeffs,
    CosineSeries,
    ForcingSpec,
    ForcingTerm,
    InitSpec,
    Samples,
    SimConfig,
    check_admissible,
)

SUBCOMMANDS = ("solve", "vch", "sweep-alpha", "contdep", "contdep-strong",
               "sweep-eps", "refine-n", "yosida-check")

_TOP_KEYS = {"alpha", "tau", "dt", "T", "picard_iters", "yosida", "basis", "potential",
             "forcing", "init", "sweep", "perturb", "check"}
_SWEEP_KEYS = {"alphas", "drift", "drift_power", "magnitudes", "epsilons", "ns"}


@dataclass(frozen=True)
class RunConfig:
    """Parsed config: the simulation setup plus experiment-specific extras."""

    subcommand: str
    potential: SplitPotential
    yosida: YosidaParams
    sim: SimConfig | None = None
    extras: dict = field(default_factory=dict)


# -- small typed getters -----------------------------------------------------


class _Section:
    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError("expected a table of dotted keys", path or None)
        self.data, self.path, self.used = data, path, set()

    def key(self, name):
        return f"{self.path}.{name}" if self.path else name

    def has(self, name):
        return name in self.data

    def raw(self, name, default=None):
        self.used.add(name)
        return self.data.get(name, default)

    def sub(self, name, required=False):
        if name not in self.data:
            if required:
                raise ConfigError("missing section", self.key(name))
            return _Section({}, self.key(name))
        self.used.add(name)
        return _Section(self.data[name], self.key(name))

    def number(self, name, default=None, required=False):
        v = self.raw(name)
        if v is None:
            if required:
                raise ConfigError("missing required number", self.key(name))
            return default
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"expected a number, got {v!r}", self.key(name))
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError("must be finite", self.key(name))
        return v

    def integer(self, name, default=None, required=False):
        v = self.raw(name)
        if v is None:
            if required:
                raise ConfigError("missing required integer", self.key(name))
            return default
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"expected an integer, got {v!r}", self.key(name))
        return v

    def string(self, name, default=None, required=False):
        v = self.raw(name)
        if v is None:
            if required:
                raise ConfigError("missing required string", self.key(name))
            return default
        if not isinstance(v, str):
            raise ConfigError(f"expected a string, got {v!r}", self.key(name))
        return v

    def numbers(self, name, default=None, required=False):
        v = self.raw(name)
        if v is None:
            if required:
                raise ConfigError("missing required list of numbers", self.key(name))
            return default
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
            raise ConfigError("expected a list of numbers", self.key(name))
        return [float(x) for x in v]

    def integers(self, name, default=None, required=False):
        v = self.raw(name)
        if v is None:
            if required:
                raise ConfigError("missing required list of integers", self.key(name))
            return default
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
            raise ConfigError("expected a list of integers", self.key(name))
        return list(v)

    def finish(self, allowed=None):
        keys = set(self.data) if allowed is None else set(self.data) - set(allowed)
        extra = sorted(k for k in keys if k not in self.used)
        if extra:
            raise ConfigError("unknown key", self.key(extra[0]))


# -- sections ------------------------------------------------------------------


def _potential(sec: _Section) -> SplitPotential:
    kind = sec.string("kind", required=True)
    try:
        kind = PotentialKind(kind)
    except ValueError:
        raise ConfigError(f"unknown potential {kind!r}; use one of "
                          + ", ".join(k.value for k in PotentialKind), sec.key("kind")) from None
    c1 = sec.number("c1", 2.0)
    c2 = sec.number("c2", 1.0)
    if kind is PotentialKind.LOGARITHMIC and not c1 > 1:
        raise ConfigError("c1 must be > 1", sec.key("c1"))
    if kind is PotentialKind.DOUBLE_OBSTACLE and not c2 > 0:
        raise ConfigError("c2 must be positive", sec.key("c2"))
    sec.finish()
    return SplitPotential(kind, c1=c1, c2=c2)


def _yosida(sec: _Section, required=True) -> YosidaParams:
    eps = sec.number("epsilon", required=required)
    if eps is None:
        eps = 0.01
    tol = sec.number("newton_tol", 1e-12)
    iters = sec.integer("newton_max_iters", 200)
    sec.finish()
    try:
        return YosidaParams(eps, tol, iters)
    except (ValueError, HrchError) as exc:
        raise ConfigError(str(exc), sec.key("epsilon")) from None


def _forcing(sec: _Section) -> ForcingSpec:
    terms = []

    def order(name):
        tail = name[4:]
        return (0, int(tail), name) if tail.isdigit() else (1, 0, name)

    for name in sorted(sec.data, key=order):
        if not name.startswith("term"):
            raise ConfigError("forcing entries must be named term1, term2, ...", sec.key(name))
        t = sec.sub(name)
        mode = t.integer("mode", 0)
        if mode < 0:
            raise ConfigError("mode must be >= 0", t.key("mode"))
        terms.append(ForcingTerm(t.number("amplitude", required=True), mode,
                                 t.number("c0", 1.0), t.number("c1", 0.0)))
        t.finish()
    return ForcingSpec(tuple(terms))


def _field_source(sec: _Section):
    """One initial field; absent or empty sections mean zero."""
    if not sec.data:
        return CosineSeries()
    kind = sec.string("kind", required=True)
    if kind == "constant":
        src = CosineSeries(sec.number("value", required=True))
    elif kind == "cosine":
        modes = sec.integers("modes", [])
        amps = sec.numbers("amplitudes", [])
        if len(modes) != len(amps):
            raise ConfigError("modes and amplitudes must have equal length", sec.key("amplitudes"))
        if any(k < 0 for k in modes):
            raise ConfigError("modes must be >= 0", sec.key("modes"))
        src = CosineSeries(sec.number("mean", 0.0), tuple(zip(modes, amps)))
    elif kind == "coeffs":
        src = Coeffs(tuple(sec.numbers("values", required=True)))
    elif kind == "samples":
        src = Samples(tuple(sec.numbers("values", required=True)))
    else:
        raise ConfigError(f"unknown field kind {kind!r}; use constant, cosine, coeffs or samples",
                          sec.key("kind"))
    sec.finish()
    return src


def _init(sec: _Section, fields_=("mu0", "nu0", "phi0")) -> dict:
    out = {name: _field_source(sec.sub(name)) for name in fields_}
    sec.finish()
    return out


def _check_samples(src, cfg: SimConfig, path):
    if isinstance(src, Samples) and len(src.values) != cfg.collocation_points:
        raise ConfigError(f"expected {cfg.collocation_points} samples (basis.M), got {len(src.values)}", path)


def _sim(doc: _Section, potential, yosida, subcommand) -> SimConfig:
    basis = doc.sub("basis")
    L = basis.number("L", 1.0)
    n = basis.integer("n", 32)
    M = basis.integer("M")
    basis.finish()
    if not L > 0:
        raise ConfigError("L must be positive", "basis.L")
    if n < 1:
        raise ConfigError("n must be a positive integer", "basis.n")
    if M is not None and M < 2 * n:
        raise ConfigError(f"M must be >= 2n = {2 * n}", "basis.M")

    alpha = doc.number("alpha", 0.0 if subcommand == "vch" else None, required=subcommand != "vch")
    if subcommand == "vch":
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError("alpha must be in [0,1] (it is ignored by vch)", "alpha")
    elif not 0.0 < alpha <= 1.0:
        raise ConfigError("alpha must be in (0,1]", "alpha")
    tau = doc.number("tau", required=True)
    if not tau > 0:
        raise ConfigError("tau must be positive", "tau")
    T = doc.number("T", 1.0)
    if not T > 0:
        raise ConfigError("T must be positive", "T")
    dt = doc.number("dt")
    if dt is not None:
        if not 0 < dt < T:
            raise ConfigError("dt must satisfy 0 < dt < T", "dt")
        steps = T / dt
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ConfigError(f"T/dt = {steps!r} must be an integer", "dt")
    picard = doc.integer("picard_iters", 2)
    if picard < 0:
        raise ConfigError("must be >= 0", "picard_iters")

    forcing = _forcing(doc.sub("forcing"))
    init = _init(doc.sub("init"))
    cfg = SimConfig(alpha=alpha, tau=tau, yosida=yosida, potential=potential, L=L, n=n, M=M,
                    dt=dt, T=T, forcing=forcing, init=InitSpec(**init), picard_iters=picard)
    for name, src in init.items():
        _check_samples(src, cfg, f"init.{name}.values")
    check_admissible(potential, cfg.basis, cfg.init.phi0.coeffs(cfg.basis), "init.phi0")
    return cfg


def _perturbation(sec: _Section):
    from .experiments import DataPerturbation

    kw = {}
    if sec.has("g"):
        kw["g"] = _forcing(sec.sub("g"))
    for name in ("mu0", "nu0", "phi0"):
        if sec.has(name):
            kw[name] = _field_source(sec.sub(name))
    sec.finish()
    if not kw:
        raise ConfigError("a perturbation direction (g, mu0, nu0 or phi0) is required", sec.path)
    return DataPerturbation(**kw)


def _sweep_extras(doc: _Section, subcommand, cfg: SimConfig | None) -> dict:
    sweep = doc.sub("sweep")
    extras = {}
    if subcommand == "sweep-alpha":
        extras["alphas"] = sweep.numbers("alphas", [1.0, 0.25, 0.0625, 0.015625, 0.00390625])
        if sweep.has("drift"):
            extras["g_drift"] = _forcing(sweep.sub("drift"))
        extras["drift_power"] = sweep.number("drift_power", 0.25)
    elif subcommand in ("contdep", "contdep-strong"):
        extras["magnitudes"] = sweep.numbers("magnitudes", [0.0, 1e-1, 1e-2, 1e-3, 1e-4])
        extras["perturbation"] = _perturbation(doc.sub("perturb", required=True))
    elif subcommand == "sweep-eps":
        extras["epsilons"] = sweep.numbers("epsilons", required=True)
    elif subcommand == "refine-n":
        extras["ns"] = sweep.integers("ns", required=True)
    elif subcommand == "yosida-check":
        check = doc.sub("check")
        extras["epsilons"] = check.numbers("epsilons", [0.5, 0.1, 0.01])
        extras["samples"] = check.integer("samples", 10000)
        extras["range"] = check.numbers("range")
        extras["m0"] = check.numbers("m0", [0.0, 0.3, -0.3])
        extras["tol"] = check.number("tol", 1e-10)
        check.finish()
        if extras["samples"] < 2:
            raise ConfigError("need at least 2 samples", "check.samples")
        if extras["range"] is not None and (len(extras["range"]) != 2 or not extras["range"][0] < extras["range"][1]):
            raise ConfigError("range must be [lo, hi] with lo < hi", "check.range")
    # sections for other subcommands may share the file; only typos are errors
    sweep.finish(allowed=_SWEEP_KEYS)
    return extras


def _finish_top(top: _Section):
    extra = sorted(k for k in top.data if k not in _TOP_KEYS)
    if extra:
        raise ConfigError("unknown key", extra[0])


def load_document(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries line and column
        raise ConfigError(f"{path}: {exc}") from None


def parse_document(doc: dict, subcommand: str = "solve") -> RunConfig:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    top = _Section(doc, "")
    potential = _potential(top.sub("potential", required=True))
    if subcommand == "yosida-check":
        # no time integration: only potential, check.* and an optional epsilon
        yosida = _yosida(top.sub("yosida"), required=False)
        extras = _sweep_extras(top, subcommand, None)
        _finish_top(top)
        return RunConfig(subcommand, potential, yosida, None, extras)
    yosida = _yosida(top.sub("yosida"))
    cfg = _sim(top, potential, yosida, subcommand)
    extras = _sweep_extras(top, subcommand, cfg)
    _finish_top(top)
    return RunConfig(subcommand, potential, yosida, cfg, extras)


def parse_config(path, subcommand: str = "solve") -> RunConfig:
    """Read and validate a config file for the given subcommand."""
    return parse_document(load_document(path), subcommand)
