"""Constant barriers and monotone iteration for semilinear elliptic problems with rough coefficients.

The pipeline regularizes coefficients by mollification at a ladder of scales
``eps``, derives constant sub/super-solutions from the coefficient sign
envelopes, solves each instance by monotone iteration and checks whether the
resulting net of solutions grows at most polynomially in ``1/eps``.
"""

from .barriers import (
    Barriers,
    LaurentSum,
    LaurentTerm,
    alpha_prime,
    beta_prime,
    closed_form_growth_bounds,
    compute_barriers,
)
from .colombeau import EpsSchedule, growth_fit, null_decay_check, representative_independence
from .config import RunConfig, parse_config, parse_config_text
from .elliptic import solve_shifted, verify_maximum_principle
from .errors import (
    BarrierNetError,
    ConfigError,
    HypothesisViolation,
    PreconditionError,
    SolverError,
)
from .grid import DiscreteField, Grid, assemble_operator, build_grid
from .lichnerowicz import HamiltonianData, assemble_hamiltonian
from .mollify import make_mollifier, regularize
from .monotone import IterationConfig, lipschitz_shift, monotone_solve, semilinear_residual
from .problem import ProblemSpec, regularize_problem
from .sweep import critical_exponent_study, run_sweep, validate_conditions

__version__ = "0.1.0"

__all__ = [
    "BarrierNetError", "Barriers", "ConfigError", "DiscreteField", "EpsSchedule", "Grid", "HamiltonianData",
    "HypothesisViolation", "IterationConfig", "LaurentSum", "LaurentTerm", "PreconditionError", "ProblemSpec",
    "RunConfig", "SolverError", "alpha_prime", "assemble_hamiltonian", "assemble_operator", "beta_prime",
    "build_grid", "closed_form_growth_bounds", "compute_barriers", "critical_exponent_study", "growth_fit",
    "lipschitz_shift", "make_mollifier", "monotone_solve", "null_decay_check", "parse_config",
    "parse_config_text", "regularize", "regularize_problem", "representative_independence", "run_sweep",
    "semilinear_residual", "solve_shifted", "validate_conditions", "verify_maximum_principle",
]
