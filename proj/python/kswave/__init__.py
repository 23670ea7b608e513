"""Keller-Segel chemotaxis forced waves in a shifting habitat."""

from ._core import (
    BoundaryCase,
    GrowthProfile,
    Grid,
    NumericalError,
    SimParams,
    ValidationError,
    check_regime,
    classify_profile,
    greens_psi,
    ignition_wave,
    lambda_infinity,
    parse_config,
    principal_eigenvalue,
    run_experiment,
    simulate,
    solve_chemical,
    theta_root,
    upper_envelope,
)

__all__ = [
    "BoundaryCase",
    "GrowthProfile",
    "Grid",
    "NumericalError",
    "SimParams",
    "ValidationError",
    "check_regime",
    "classify_profile",
    "greens_psi",
    "ignition_wave",
    "lambda_infinity",
    "parse_config",
    "principal_eigenvalue",
    "run_experiment",
    "simulate",
    "solve_chemical",
    "theta_root",
    "upper_envelope",
]
