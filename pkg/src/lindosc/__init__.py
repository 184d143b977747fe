"""Gaussian dynamics of the damped quantum oscillator.

Three independent routes to the same evolution (closed-form second
moments, moment ODEs, phase-space transport on a grid) plus the
classicality diagnostics built on them.  The routes deliberately share
no numerical machinery so they can cross-check each other; see the
README for which one to reach for.
"""

from .model import (DiffusionCoefficients, InitialGaussian, ModelParams, MomentState,
                    ValidationReport, coth_from_temperature, gibbs_coefficients,
                    initial_covariance, validate)
from .moments import (ClosedFormContext, IntegrationError, MomentTrajectory,
                      asymptotic_covariance, evolve, moment_rhs,
                      resolve_sigma_pq_sign, sigma_closed, sigma_pq_closed)
from .states import (ABGamma, abgamma, density_matrix_at, purity, stationary_wigner,
                     wigner_at)
from .classicality import (NO_CORRELATIONS, ClassicalityThresholds, TimeScaleResult,
                           classicality_window, decoherence_rate, decoherence_time,
                           decoherence_time_high_temperature,
                           decoherence_time_high_temperature_uncorrelated,
                           decoherence_time_uncorrelated,
                           decoherence_time_zero_temperature, delta_cc, delta_qd,
                           thermal_time, thermal_time_high_temperature)
from .fokker_planck import (FPError, FPRun, FPScheme, GridSpec, PhaseGrid, build_grid,
                            convergence_study, extract_moments, run_fp)

__version__ = "0.1.0"

__all__ = [
    "ABGamma", "ClassicalityThresholds", "ClosedFormContext",
    "DiffusionCoefficients", "FPError", "FPRun", "FPScheme", "GridSpec",
    "InitialGaussian", "IntegrationError", "ModelParams", "MomentState",
    "MomentTrajectory", "NO_CORRELATIONS", "PhaseGrid", "TimeScaleResult",
    "ValidationReport", "abgamma", "asymptotic_covariance", "build_grid",
    "classicality_window", "convergence_study", "coth_from_temperature",
    "decoherence_rate", "decoherence_time",
    "decoherence_time_high_temperature",
    "decoherence_time_high_temperature_uncorrelated",
    "decoherence_time_uncorrelated", "decoherence_time_zero_temperature",
    "delta_cc", "delta_qd", "density_matrix_at", "evolve", "extract_moments",
    "gibbs_coefficients", "initial_covariance", "moment_rhs", "purity",
    "resolve_sigma_pq_sign", "run_fp", "sigma_closed", "sigma_pq_closed",
    "stationary_wigner", "thermal_time", "thermal_time_high_temperature",
    "validate", "wigner_at",
]
