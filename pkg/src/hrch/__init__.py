"""Spectral-Galerkin simulator for the hyperbolically relaxed viscous Cahn-Hilliard system."""
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    HrchError,
    IoError,
    SeparationError,
    ShapeError,
)
from .potentials import (
    PotentialKind,
    SplitPotential,
    YosidaParams,
    check_yosida_properties,
    yosida_f1eps,
    yosida_prime,
    yosida_resolvent,
    zelik_constants,
    zelik_violations,
)
from .spectral import SpectralBasis, build_basis, nonlinear_term, project, synth
from .solver import (
    Coeffs,
    CosineSeries,
    ForcingSpec,
    ForcingTerm,
    GalerkinState,
    InitSpec,
    Samples,
    SimConfig,
    Trajectory,
    estimate_temporal_order,
    initial_state,
    solve,
    step,
)
from .vch import VchTrajectory, vch_solve, vch_step
from .diagnostics import (
    DiagnosticsRecord,
    energy_balance_residual,
    mass_invariant_residual,
    separation_report,
    trajectory_norms,
)
from .experiments import (
    DataPerturbation,
    SweepResult,
    alpha_sweep,
    continuous_dependence,
    continuous_dependence_strong,
    epsilon_sweep,
    fit_power_law,
    n_refinement,
)
from .config import RunConfig, parse_config
from .io import emit_csv, emit_svg_plots, read_csv

__version__ = "0.1.0"
