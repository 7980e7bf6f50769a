"""Moving free boundaries for a finite-fuel singular control problem with
discretionary stopping, in the regime where a lump of fuel is spent at once."""

from .errors import (
    BreakpointError,
    ConvergenceError,
    DomainError,
    FiniteFuelError,
    RegimeError,
    ResolutionError,
    ValidationError,
)
from .model import DerivedConstants, ModelParams, Regime, derive_constants
from .boundary import (
    BoundaryPoint,
    BoundaryTable,
    boundary_table,
    find_c0,
    find_c2,
    solve_boundary,
)
from .value import ValueProfile, v_stop, v_tilde, value_profile
from .oracle import minorant_oracle, psor_oracle
from .simulate import SimConfig, SimResult, simulate_policy
from .verify import CheckReport, VerifyConfig, run_suite

__version__ = "0.1.0"

__all__ = [
    "BreakpointError", "ConvergenceError", "DomainError", "FiniteFuelError", "RegimeError",
    "ResolutionError", "ValidationError",
    "DerivedConstants", "ModelParams", "Regime", "derive_constants",
    "BoundaryPoint", "BoundaryTable", "boundary_table", "find_c0", "find_c2", "solve_boundary",
    "ValueProfile", "v_stop", "v_tilde", "value_profile",
    "minorant_oracle", "psor_oracle",
    "SimConfig", "SimResult", "simulate_policy",
    "CheckReport", "VerifyConfig", "run_suite",
]
