"""Analysis and release-planning toolkit for Wolbachia-based mosquito biocontrol.

Closed-form equilibria and stability for a planar two-population competition
model, adaptive trajectory integration, extraction of the threshold curve
dividing the two attraction basins, minimal viable release sizes, and
impulsive periodic-release simulation and optimization. A CLI (`wolbachia`)
and an HTTP/JSON service (`wolbachia.service`) expose every analysis.
"""

__version__ = "0.1.0"

from .model import (
    DomainError,
    ModelValidationError,
    ModelParameters,
    PopulationState,
    EquilibriumSet,
    EquilibriumReport,
    StabilityReport,
    ValidationReport,
    load_parameters,
    params_hash,
    validate_params,
    vector_field,
    jacobian,
    cooperative_jacobian,
    equilibria,
    classify_stability,
    nullclines,
    order_leq_cone,
    order_lt_cone,
    order_ll_cone,
)
from .integrate import (
    NumericalError,
    IntegrationOptions,
    Trajectory,
    BasinLabel,
    integrate,
    classify_basin,
    default_capture_radius,
)
from .threshold import (
    AmbiguousIntervalError,
    SeparatrixCurve,
    ManifoldPair,
    minimal_viable_w,
    separatrix_backward,
    separatrix_bisection,
    unstable_manifold,
)
from .planner import (
    BudgetExceeded,
    ReleaseSchedule,
    JumpEvent,
    ImpulsiveTrajectory,
    PlanResult,
    simulate_impulsive,
    simulate_release_list,
    minimal_release_size,
    tradeoff_table,
)

__all__ = [
    "__version__",
    "DomainError",
    "ModelValidationError",
    "ModelParameters",
    "PopulationState",
    "EquilibriumSet",
    "EquilibriumReport",
    "StabilityReport",
    "ValidationReport",
    "load_parameters",
    "params_hash",
    "validate_params",
    "vector_field",
    "jacobian",
    "cooperative_jacobian",
    "equilibria",
    "classify_stability",
    "nullclines",
    "order_leq_cone",
    "order_lt_cone",
    "order_ll_cone",
    "NumericalError",
    "IntegrationOptions",
    "Trajectory",
    "BasinLabel",
    "integrate",
    "classify_basin",
    "default_capture_radius",
    "AmbiguousIntervalError",
    "SeparatrixCurve",
    "ManifoldPair",
    "minimal_viable_w",
    "separatrix_backward",
    "separatrix_bisection",
    "unstable_manifold",
    "BudgetExceeded",
    "ReleaseSchedule",
    "JumpEvent",
    "ImpulsiveTrajectory",
    "PlanResult",
    "simulate_impulsive",
    "simulate_release_list",
    "minimal_release_size",
    "tradeoff_table",
]
