"""Restoration planning for power distribution systems with
decision-dependent customer interruption cost and cold load pickup."""

__version__ = "0.1.0"

from .backends import BackendConfig, BackendUnavailable, Solution, solve
from .cic import (
    CicProfile,
    cumulative_cic_oracle,
    emit_cic_constraints,
    fit_quadratic_rate,
    rate_oracle,
)
from .clpu import (
    ClpuProfile,
    characteristics_oracle,
    curve_oracle,
    emit_clpu_constraints,
    threshold_round,
)
from .fleet import emit_routing_constraints, emit_scheduling_constraints
from .grid import (
    RestorationPlan,
    emit_distflow_constraints,
    emit_objective,
    emit_radiality_constraints,
    extract_plan,
)
from .milp import Constraint, MilpModel, ModelError, VarSpec, emit_lp
from .netdata import (
    Scenario,
    ScenarioError,
    builtin_case33,
    load_scenario,
    save_scenario,
    validate_scenario,
)
from .planner import build_restoration_model, solve_restoration
from .verify import (
    ValidationReport,
    brute_force_square_check,
    check_solution,
    clpu_equivalence_check,
    simulate_schedule,
)

__all__ = [
    "BackendConfig",
    "BackendUnavailable",
    "CicProfile",
    "ClpuProfile",
    "Constraint",
    "MilpModel",
    "ModelError",
    "RestorationPlan",
    "Scenario",
    "ScenarioError",
    "Solution",
    "ValidationReport",
    "VarSpec",
    "brute_force_square_check",
    "builtin_case33",
    "characteristics_oracle",
    "check_solution",
    "clpu_equivalence_check",
    "cumulative_cic_oracle",
    "curve_oracle",
    "emit_cic_constraints",
    "emit_clpu_constraints",
    "emit_distflow_constraints",
    "emit_lp",
    "emit_objective",
    "emit_radiality_constraints",
    "emit_routing_constraints",
    "emit_scheduling_constraints",
    "extract_plan",
    "fit_quadratic_rate",
    "load_scenario",
    "rate_oracle",
    "save_scenario",
    "simulate_schedule",
    "solve",
    "solve_restoration",
    "threshold_round",
    "validate_scenario",
    "build_restoration_model",
    "check_solution",
]
