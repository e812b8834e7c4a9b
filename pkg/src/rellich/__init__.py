"""Weighted Rellich and Rellich-Sobolev constants on cones, computed on the cylinder."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

from .cylinder import (
    CylinderFunction, Grid1D, GridError, ModeProfile, NormPair, first_order_norms, reflect_and_hat,
    second_order_norms, uniform_grid,
)
from .degeneration import (
    ProfileOmega, RateFit, cutoff_density_residual, fit_rate, mitidieri_sharpness_quotient,
    navier_degeneration_quotient, resonance_family_bound,
)
from .harness import SampleSpec, SweepRecord, generate_samples, run_sweep, verify_inequalities
from .modes import (
    ShootingError, SphericalMode, cap_for_eigenvalue, harmonic, mu2_symbol_oracle,
)
from .params import (
    DerivedParams, ParameterError, Params, derive_params, is_resonant, mu22_closed_form,
    sphere_eigenvalue,
)
from .poisson import (
    AnnulusProblem, RadialSolution, comparison_check, solve_radial_annulus, weighted_stability_bound,
)
from .rayleigh import (
    ConstantEstimate, QuotientReport, estimate_constant, minimize_mode_general, minimize_mode_p2,
)

__all__ = [
    "AnnulusProblem", "ConstantEstimate", "CylinderFunction", "DerivedParams", "Grid1D", "GridError",
    "ModeProfile", "NormPair", "ParameterError", "Params", "ProfileOmega", "QuotientReport",
    "RadialSolution", "RateFit", "SampleSpec", "ShootingError", "SphericalMode", "SweepRecord",
    "cap_for_eigenvalue", "comparison_check", "cutoff_density_residual", "derive_params",
    "estimate_constant", "first_order_norms", "fit_rate", "generate_samples", "harmonic",
    "is_resonant", "minimize_mode_general", "minimize_mode_p2", "mitidieri_sharpness_quotient",
    "mu22_closed_form", "mu2_symbol_oracle", "navier_degeneration_quotient", "reflect_and_hat",
    "resonance_family_bound", "run_sweep", "second_order_norms", "solve_radial_annulus",
    "sphere_eigenvalue", "uniform_grid", "verify_inequalities", "weighted_stability_bound",
]
