"""Simulator for EIT ground-state laser cooling of a trapped tripod atom."""

from .errors import (
    ConfigError,
    HeatingRegimeError,
    NearSingularSolveError,
    NonUniqueSteadyStateError,
    NumericalError,
    PreconditionError,
    ResourceError,
    ValidationError,
)
from .full import build_full_liouvillian, evolve, fit_cooling_rate, steady_state_full, thermal_state
from .internal import absorption, absorption_sweep, build_internal_liouvillian, find_spectrum_features, steady_state
from .presets import PRESET_NAMES, preset
from .rates import (
    MotionalDistribution,
    RateCoefficients,
    cooling_rate_and_limit,
    mean_n_closed_form,
    optimal_conditions,
    rate_coefficients,
    rate_equation_evolve,
    trap_matched_residual,
)
from .scenario import DecayChannel, LaserDrive, LowerLevel, Scenario, Trap, dump_scenario, load_scenario
from .spectrum import build_v1, correlation_spectrum, numeric_rates

__version__ = "0.1.0"
