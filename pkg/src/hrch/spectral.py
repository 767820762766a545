"""Neumann-Laplacian cosine basis on an interval (0, L).

The eigenpairs are ``lambda_j = (pi (j-1) / L)**2`` with ``e_1 = L**-0.5``
and ``e_j = sqrt(2/L) cos(pi (j-1) x / L)`` for ``j >= 2`` (1-based, as
in the usual numbering; arrays below are 0-based).  Nonlinear terms are
evaluated pseudospectrally on the midpoint rule ``x_m = L (m - 1/2) / M``,
which integrates ``cos(a x) cos(b x)`` exactly for every pair of basis
modes when ``M >= n``, so discrete orthonormality holds to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .potentials import PotentialKind, SplitPotential, YosidaParams, yosida_prime


@dataclass(frozen=True)
class SpectralBasis:
    L: float
    n: int
    M: int
    lam: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    # E[j, m] = e_j(x_m)
    E: np.ndarray = field(repr=False)

    @property
    def sqrt_lam(self):
        return np.sqrt(self.lam)

    def eval(self, c, x):
        """Evaluate the expansion with coefficients ``c`` at arbitrary points."""
        c = np.asarray(c, dtype=float)
        return basis_functions(self.L, self.n, x).T @ c


def basis_functions(L, n, x):
    """Matrix of e_j(x) with shape (n, len(x))."""
    x = np.asarray(x, dtype=float)
    k = np.arange(n)[:, None]
    E = np.sqrt(2.0 / L) * np.cos(np.pi * k * x[None, :] / L)
    E[0, :] = 1.0 / np.sqrt(L)
    return E


def default_M(n, kind=None):
    """2n collocation points; 4n for the double obstacle (kinked nonlinearity)."""
    if kind is not None and PotentialKind(kind) is PotentialKind.DOUBLE_OBSTACLE:
        return 4 * n
    return 2 * n


def build_basis(L: float, n: int, M: int | None = None) -> SpectralBasis:
    if not L > 0:
        raise ConfigError("L must be positive", "basis.L")
    if int(n) != n or n < 1:
        raise ConfigError("n must be a positive integer", "basis.n")
    n = int(n)
    if M is None:
        M = default_M(n)
    if int(M) != M or M < 2 * n:
        raise ConfigError(f"M must be an integer >= 2n = {2 * n}, got {M}", "basis.M")
    M = int(M)
    L = float(L)
    grid = L * (np.arange(1, M + 1) - 0.5) / M
    weights = np.full(M, L / M)
    lam = (np.pi * np.arange(n) / L) ** 2
    E = basis_functions(L, n, grid)
    for a in (lam, grid, weights, E):
        a.setflags(write=False)
    return SpectralBasis(L, n, M, lam, grid, weights, E)


def project(basis: SpectralBasis, samples) -> np.ndarray:
    """Discrete H-orthogonal projection of grid samples onto V_n."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != basis.M:
        raise ShapeError(f"expected {basis.M} samples, got {samples.shape[-1]}")
    return (samples * basis.weights) @ basis.E.T


def synth(basis: SpectralBasis, c) -> np.ndarray:
    """Values of sum_j c_j e_j at the collocation nodes."""
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != basis.n:
        raise ShapeError(f"expected {basis.n} coefficients, got {c.shape[-1]}")
    return c @ basis.E


def fit_coeffs(basis: SpectralBasis, c) -> np.ndarray:
    """Truncate or zero-pad a coefficient vector to the basis dimension."""
    c = np.asarray(c, dtype=float).ravel()
    out = np.zeros(basis.n)
    k = min(basis.n, c.size)
    out[:k] = c[:k]
    return out


def h_norm(c) -> float:
    return float(np.sqrt(np.sum(np.square(c), axis=-1)))


def grad_norm(basis: SpectralBasis, c) -> float:
    """||grad v|| for v = sum c_j e_j, i.e. sqrt(sum lambda_j c_j^2)."""
    return float(np.sqrt(np.sum(basis.lam * np.square(c), axis=-1)))


def laplacian_norm(basis: SpectralBasis, c) -> float:
    return float(np.sqrt(np.sum(np.square(basis.lam * c), axis=-1)))


def grid_norm(basis: SpectralBasis, values) -> float:
    """Quadrature L2 norm of grid values."""
    return float(np.sqrt(np.sum(basis.weights * np.square(values), axis=-1)))


def nonlinear_term(basis: SpectralBasis, phi, p: SplitPotential, y: YosidaParams) -> np.ndarray:
    """Galerkin coefficients of f'_{1,eps}(phi) + f2'(phi)."""
    values = synth(basis, phi)
    return project(basis, yosida_prime(p, y, values) + p.f2_prime(values))
