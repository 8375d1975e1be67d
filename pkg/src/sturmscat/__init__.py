"""Spectral and scattering computations for Sturm-Liouville operators
``-(p u')' + q u`` with a 1-periodic background and a compactly supported
perturbation, on piecewise-constant coefficients."""

from .coefficients import (
    Coefficients,
    PeriodicBackground,
    Perturbation,
    PerturbedCoefficients,
    PiecewiseCoefficients,
    Profile,
    mollify_sequence,
    perturb,
    sample_coefficients,
    sample_smooth,
)
from .errors import ConfigError, NumericalError, PreconditionError
from .floquet import StabilityInterval, band_edges, discriminant, floquet_data, m0_floquet, monodromy, multipliers
from .propagator import cell_transfer, solve_ivp, transfer, wronskian
from .scattering import ScatteringProblem, is_reflectionless, reflection_scan, scattering_coefficients
from .weyl import WeylDisc, m_disc, riccati_propagate, weyl_disc
from .asymptotics import rescaled_m, scaling_bundle, weyl_solution_growth
from .liouville import build_map, reflectionless_q_from_p, verify_f_zero_rigidity, verify_equivalence

__version__ = "0.1.0"

__all__ = [
    "Coefficients",
    "PeriodicBackground",
    "Perturbation",
    "PerturbedCoefficients",
    "PiecewiseCoefficients",
    "Profile",
    "mollify_sequence",
    "perturb",
    "sample_coefficients",
    "sample_smooth",
    "ConfigError",
    "NumericalError",
    "PreconditionError",
    "StabilityInterval",
    "band_edges",
    "discriminant",
    "floquet_data",
    "m0_floquet",
    "monodromy",
    "multipliers",
    "cell_transfer",
    "solve_ivp",
    "transfer",
    "wronskian",
    "ScatteringProblem",
    "is_reflectionless",
    "reflection_scan",
    "scattering_coefficients",
    "WeylDisc",
    "m_disc",
    "riccati_propagate",
    "weyl_disc",
    "rescaled_m",
    "scaling_bundle",
    "weyl_solution_growth",
    "build_map",
    "reflectionless_q_from_p",
    "verify_f_zero_rigidity",
    "verify_equivalence",
]
