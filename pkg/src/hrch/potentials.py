"""Split double-well potentials and their Moreau-Yosida regularization.

Every potential is written as ``f = f1 + f2`` with ``f1`` convex, lower
semicontinuous and ``f1(0) = 0``, and ``f2`` smooth with a Lipschitz
derivative.  Three families are supported:

* regular:         f1(r) = r**4 / 4,                  f2(r) = -r**2 / 2 + 1/4
* logarithmic:     f1(r) = (1+r)ln(1+r) + (1-r)ln(1-r), f2(r) = -c1 r**2
* double obstacle: f1 = indicator of [-1, 1],         f2(r) = c2 (1 - r**2)

All evaluation routines accept scalars or numpy arrays and are vectorized.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import ConvergenceError, DomainError

_F64_EPS = np.finfo(float).eps


class PotentialKind(str, enum.Enum):
    REGULAR = "regular"
    LOGARITHMIC = "logarithmic"
    DOUBLE_OBSTACLE = "double_obstacle"


def _ret(value, like):
    """Return a Python float when the caller passed a scalar."""
    if np.ndim(like) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class SplitPotential:
    kind: PotentialKind
    c1: float = 2.0
    c2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.LOGARITHMIC and not self.c1 > 1:
            raise DomainError(f"logarithmic potential needs c1 > 1, got {self.c1}")
        if self.kind is PotentialKind.DOUBLE_OBSTACLE and not self.c2 > 0:
            raise DomainError(f"double obstacle potential needs c2 > 0, got {self.c2}")

    @classmethod
    def regular(cls):
        return cls(PotentialKind.REGULAR)

    @classmethod
    def logarithmic(cls, c1=2.0):
        return cls(PotentialKind.LOGARITHMIC, c1=c1)

    @classmethod
    def double_obstacle(cls, c2=1.0):
        return cls(PotentialKind.DOUBLE_OBSTACLE, c2=c2)

    @property
    def r_minus(self) -> float:
        return -math.inf if self.kind is PotentialKind.REGULAR else -1.0

    @property
    def r_plus(self) -> float:
        return math.inf if self.kind is PotentialKind.REGULAR else 1.0

    @property
    def f2_lipschitz(self) -> float:
        if self.kind is PotentialKind.REGULAR:
            return 1.0
        if self.kind is PotentialKind.LOGARITHMIC:
            return 2.0 * self.c1
        return 2.0 * self.c2

    @property
    def has_open_domain(self) -> bool:
        """True when f1 is C^2 on an open interval (regular, logarithmic)."""
        return self.kind is not PotentialKind.DOUBLE_OBSTACLE

    def in_subdiff_domain(self, r):
        """Membership in D(df1): R, (-1, 1) or [-1, 1]."""
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.REGULAR:
            out = np.isfinite(r)
        elif self.kind is PotentialKind.LOGARITHMIC:
            out = np.abs(r) < 1.0
        else:
            out = np.abs(r) <= 1.0
        return _ret(out, r) if np.ndim(r) else bool(out)

    def is_interior(self, r) -> bool:
        return bool(self.r_minus < r < self.r_plus)

    # -- convex part -------------------------------------------------------

    def f1(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.REGULAR:
            out = 0.25 * r**4
        elif self.kind is PotentialKind.LOGARITHMIC:
            a = np.abs(r)
            ac = np.minimum(a, 0.5)
            # 2 r atanh(r) + log(1 - r^2) keeps f1 >= 0 near 0; xlogy form elsewhere
            small = 2.0 * ac * np.arctanh(ac) + np.log1p(-ac * ac)
            rc = np.clip(r, -1.0, 1.0)
            large = xlogy(1.0 + rc, 1.0 + rc) + xlogy(1.0 - rc, 1.0 - rc)
            out = np.where(a <= 0.5, small, np.where(a <= 1.0, large, np.inf))
        else:
            out = np.where(np.abs(r) <= 1.0, 0.0, np.inf)
        return _ret(out, r)

    def f1_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.DOUBLE_OBSTACLE:
            raise DomainError("df1 is multivalued for the double obstacle potential")
        if not np.all(self.in_subdiff_domain(r)):
            raise DomainError(f"f1' undefined outside ({self.r_minus}, {self.r_plus})")
        if self.kind is PotentialKind.REGULAR:
            out = r**3
        else:
            out = np.log1p(r) - np.log1p(-r)
        return _ret(out, r)

    def f1_second(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.DOUBLE_OBSTACLE:
            raise DomainError("f1'' undefined for the double obstacle potential")
        if not np.all(self.in_subdiff_domain(r)):
            raise DomainError(f"f1'' undefined outside ({self.r_minus}, {self.r_plus})")
        if self.kind is PotentialKind.REGULAR:
            out = 3.0 * r**2
        else:
            out = 2.0 / (1.0 - r**2)
        return _ret(out, r)

    def minimal_section(self, r):
        """Minimal-modulus element of df1(r); +inf outside D(df1)."""
        r = np.asarray(r, dtype=float)
        inside = np.asarray(self.in_subdiff_domain(r))
        if self.kind is PotentialKind.DOUBLE_OBSTACLE:
            out = np.where(inside, 0.0, np.inf)
        else:
            rs = np.where(inside, r, 0.0)
            out = np.where(inside, self.f1_prime(rs), np.inf)
        return _ret(out, r)

    # -- concave part ------------------------------------------------------

    def f2(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.REGULAR:
            out = -0.5 * r**2 + 0.25
        elif self.kind is PotentialKind.LOGARITHMIC:
            out = -self.c1 * r**2
        else:
            out = self.c2 * (1.0 - r**2)
        return _ret(out, r)

    def f2_prime(self, r):
        r = np.asarray(r, dtype=float)
        return _ret(-self.f2_lipschitz * r, r)

    def f2_second(self, r):
        r = np.asarray(r, dtype=float)
        return _ret(np.full_like(r, -self.f2_lipschitz), r)

    def f(self, r):
        return self.f1(r) + self.f2(r)


@dataclass(frozen=True)
class YosidaParams:
    epsilon: float
    newton_tol: float = 1e-12
    newton_max_iters: int = 200

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.newton_tol > 0:
            raise DomainError("newton_tol must be positive")
        if self.newton_max_iters < 1:
            raise DomainError("newton_max_iters must be a positive integer")


def _newton_odd(res, dres, a, lo, hi, s0, tol, max_iters):
    """Safeguarded Newton for an increasing residual on a bracket.

    Solves ``res(s) = a`` componentwise with ``lo <= s <= hi`` starting
    from ``s0``.  Newton iterates leaving the bracket are replaced by
    bisection.  Once the residual test passes a single polishing step is
    taken so that the root is accurate to a few ulps, not merely to ``tol``.
    """
    s = s0.copy()
    scale = tol * (1.0 + a)
    for _ in range(max_iters):
        g = res(s) - a
        width = hi - lo
        done = (np.abs(g) <= scale) | (width <= 4 * _F64_EPS * np.maximum(1.0, np.abs(s)))
        hi = np.where(g > 0, s, hi)
        lo = np.where(g < 0, s, lo)
        trial = s - g / dres(s)
        bad = ~np.isfinite(trial) | (trial < lo) | (trial > hi)
        trial = np.where(bad, 0.5 * (lo + hi), trial)
        if np.all(done):
            return np.where(bad, s, trial)
        s = np.where(done, s, trial)
    raise ConvergenceError(f"resolvent Newton failed after {max_iters} iterations")


def _resolvent_and_prime(p: SplitPotential, y: YosidaParams, r):
    """Return (J_eps(r), f'_{1,eps}(r)) as arrays shaped like r."""
    r = np.asarray(r, dtype=float)
    eps = y.epsilon
    if p.kind is PotentialKind.DOUBLE_OBSTACLE:
        s = np.clip(r, -1.0, 1.0)
        return s, (r - s) / eps
    a = np.atleast_1d(np.abs(r))
    lo = np.zeros_like(a)
    if p.kind is PotentialKind.REGULAR:
        # s + eps s^3 = |r|; convex, so Newton from the right is monotone
        s = _newton_odd(lambda s: s + eps * s**3, lambda s: 1.0 + 3.0 * eps * s**2,
                        a, lo, a.copy(), a.copy(), y.newton_tol, y.newton_max_iters)
        d = s**3
    else:
        # s = tanh(u) turns s + eps ln((1+s)/(1-s)) = |r| into
        # tanh(u) + 2 eps u = |r|; concave, so Newton from the left is monotone
        u = _newton_odd(lambda u: np.tanh(u) + 2.0 * eps * u,
                        lambda u: 1.0 - np.tanh(u) ** 2 + 2.0 * eps,
                        a, lo, a / (2.0 * eps), lo.copy(), y.newton_tol, y.newton_max_iters)
        s = np.tanh(u)
        d = 2.0 * u
    sign = np.sign(np.atleast_1d(r))
    return (sign * s).reshape(r.shape), (sign * d).reshape(r.shape)


def yosida_resolvent(p: SplitPotential, y: YosidaParams, r):
    """J_eps(r) = (I + eps df1)^{-1}(r), defined on the whole real line."""
    s, _ = _resolvent_and_prime(p, y, r)
    return _ret(s, r)


def yosida_prime(p: SplitPotential, y: YosidaParams, r):
    """Derivative of the Moreau envelope, (r - J_eps(r)) / eps.

    For the smooth families this is evaluated as f1'(J_eps(r)), the same
    number without the cancellation in r - J when eps is small.
    """
    _, d = _resolvent_and_prime(p, y, r)
    return _ret(d, r)


def yosida_resolvent_and_prime(p: SplitPotential, y: YosidaParams, r):
    """Both J_eps(r) and f'_{1,eps}(r) from one root solve (arrays)."""
    return _resolvent_and_prime(p, y, r)


def yosida_f1eps(p: SplitPotential, y: YosidaParams, r):
    """Moreau envelope f_{1,eps}(r) = |r - J|^2 / (2 eps) + f1(J)."""
    s, d = _resolvent_and_prime(p, y, r)
    # r - J = eps * d, computed without cancellation
    return _ret(0.5 * y.epsilon * d**2 + p.f1(s), r)


def yosida_second_secant(p: SplitPotential, y: YosidaParams, a, b):
    """Secant slope of f'_{1,eps} between a and b (f'' surrogate)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = yosida_prime(p, y, a)
    db = yosida_prime(p, y, b)
    diff = b - a
    safe = np.where(diff == 0, 1.0, diff)
    return np.where(diff == 0, 0.0, (db - da) / safe)


@dataclass
class PropertyResult:
    passed: bool
    worst_violation: float


@dataclass
class PropertyReport:
    results: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __getitem__(self, name):
        return self.results[name]

    def summary(self) -> str:
        return "\n".join(
            f"{name:22s} {'pass' if r.passed else 'FAIL'}  worst={r.worst_violation:.3e}"
            for name, r in self.results.items()
        )


def check_yosida_properties(p: SplitPotential, y: YosidaParams, samples, tol=1e-10):
    """Check monotonicity, Lipschitz bound, f'(0)=0 and envelope bounds.

    Violations are measured in scale-free units: the Lipschitz ratio is
    compared against 1/eps relatively, the section and envelope bounds
    relatively to ``1 + |bound|``.
    """
    r = np.sort(np.asarray(samples, dtype=float).ravel())
    if r.size == 0:
        raise DomainError("samples must be nonempty")
    eps = y.epsilon
    J, d = yosida_resolvent_and_prime(p, y, r)
    env = yosida_f1eps(p, y, r)
    report = PropertyReport()

    def add(name, worst):
        worst = max(float(worst), 0.0) + 0.0  # no -0.0
        report.results[name] = PropertyResult(worst <= tol, worst)

    dr = np.diff(r)
    keep = dr > 0
    dd = np.diff(d)[keep]
    dr = dr[keep]
    dJ = np.diff(J)[keep]
    if dr.size:
        # monotone: slope >= 0, measured against the 1/eps scale
        add("monotone", np.max(-dd / dr) * eps)
        add("lipschitz", np.max(np.abs(dd) / dr) * eps - 1.0)
        add("resolvent_nonexpansive", np.max(np.abs(dJ) / dr) - 1.0)
        add("resolvent_monotone", np.max(-dJ / dr))
    else:
        for name in ("monotone", "lipschitz", "resolvent_nonexpansive", "resolvent_monotone"):
            add(name, 0.0)
    add("zero_at_origin", abs(yosida_prime(p, y, 0.0)) + abs(yosida_resolvent(p, y, 0.0)))

    inside = np.asarray(p.in_subdiff_domain(r), dtype=bool)
    if inside.any():
        sec = np.abs(p.minimal_section(r[inside]))
        add("minimal_section_bound", np.max((np.abs(d[inside]) - sec) / (1.0 + sec)))
    else:
        add("minimal_section_bound", 0.0)

    f1 = np.asarray(p.f1(r))
    finite = np.isfinite(f1)
    lower = np.max(-env)
    upper = np.max((env[finite] - f1[finite]) / (1.0 + np.abs(f1[finite]))) if finite.any() else 0.0
    add("envelope_bounds", max(lower, upper))
    return report


def zelik_constants(p: SplitPotential, y: YosidaParams, m0: float, samples, margin=1e-12):
    """Constants (delta0, C0) with f'(r)(r - m0) >= delta0 |f'(r)| - C0.

    delta0 is half the distance from m0 to the nearer endpoint of the
    domain (capped at 1); C0 is the largest sampled violation plus a
    small margin.
    """
    if not p.is_interior(m0):
        raise DomainError(f"m0={m0} must lie in the interior of D(df1)")
    delta0 = min(1.0, 0.5 * min(m0 - p.r_minus, p.r_plus - m0))
    r = np.asarray(samples, dtype=float).ravel()
    d = np.asarray(yosida_prime(p, y, r))
    gap = delta0 * np.abs(d) - d * (r - m0)
    worst = float(np.max(gap)) if gap.size else 0.0
    C0 = max(0.0, worst) + (margin if worst > 0 else 0.0)
    return delta0, C0


def zelik_violations(p, y, m0, samples, delta0, C0):
    """Number of samples where the inequality fails for the given constants."""
    r = np.asarray(samples, dtype=float).ravel()
    d = np.asarray(yosida_prime(p, y, r))
    return int(np.count_nonzero(d * (r - m0) < delta0 * np.abs(d) - C0))
