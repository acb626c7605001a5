"""Damped wave equation with a piecewise-quadratic adhesion potential.

Finite-difference solver with exact discrete energy bookkeeping, long-time
analysis tools and an exactly solvable hybrid ODE model of the spatially
uniform dynamics.
"""

from .asymptotics import (
    detect_equilibrium,
    ell_limit,
    fit_decay,
    predict_u_inf_modulus,
)
from .config import ExperimentSpec, emit, parse_config
from .energy import (
    EnergyLedger,
    balance_residual_E,
    balance_residual_J,
    energy_E,
    functional_G,
    functional_G_lambda,
    functional_J,
)
from .errors import (
    AdhesionWaveError,
    ConfigError,
    ConsistencyError,
    NumericalBlowupError,
    ParameterError,
    PreconditionError,
)
from .experiments import run_experiment
from .kernels import BACKEND
from .ode import OdeParams, classify_case, next_event, regime_solution, rk_oracle, solve_exact, verify_uniform_decay
from .pde import Grid1D, InitialData, PdeState, Profile, RunConfig, cfl_limit, simulate, step
from .potential import PotentialParams, check_properties, dphi, phi

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PotentialParams", "phi", "dphi", "check_properties",
    "Grid1D", "PdeState", "Profile", "InitialData", "RunConfig", "cfl_limit", "step", "simulate",
    "EnergyLedger", "energy_E", "functional_J", "functional_G", "functional_G_lambda",
    "balance_residual_E", "balance_residual_J",
    "detect_equilibrium", "predict_u_inf_modulus", "ell_limit", "fit_decay",
    "OdeParams", "classify_case", "regime_solution", "next_event", "solve_exact", "rk_oracle",
    "verify_uniform_decay",
    "ExperimentSpec", "parse_config", "emit", "run_experiment",
    "AdhesionWaveError", "ParameterError", "PreconditionError", "ConfigError",
    "NumericalBlowupError", "ConsistencyError",
]
