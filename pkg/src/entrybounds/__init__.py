"""Entrywise interval bounds and condition numbers for nearly
data-consistent solutions of linear inverse problems."""

from .bounds import (
    BoundStatus,
    ConditionReport,
    EntryBound,
    ExtremalSolution,
    LinearSystem,
    Target,
    adjacent_difference_bounds,
    condition_report,
    crlb_identity_check,
    ellipsoid_volume,
    entrywise_bounds,
    epsilon_heuristic,
    extremal_solution,
    functional_bound,
    global_bounds,
)
from .core import (
    SvdFactors,
    nullspace_component,
    orthogonal_to_nullspace,
    pinv_apply,
    pinv_transpose_apply,
    pinv_transpose_norm,
    residual_projection_norm,
    svd_truncated,
)
from .lifting import LiftedSystem, lift_matrix, lift_system, lift_vector, unlift_solution
from .matfree import (
    DiagEstimate,
    LandweberConfig,
    LandweberResult,
    LinearOperator,
    landweber_pinv,
    power_iteration_sigma1,
    stochastic_diag,
)

__version__ = "0.1.0"

__all__ = [
    "BoundStatus",
    "ConditionReport",
    "DiagEstimate",
    "EntryBound",
    "ExtremalSolution",
    "LandweberConfig",
    "LandweberResult",
    "LiftedSystem",
    "LinearOperator",
    "LinearSystem",
    "SvdFactors",
    "Target",
    "adjacent_difference_bounds",
    "condition_report",
    "crlb_identity_check",
    "ellipsoid_volume",
    "entrywise_bounds",
    "epsilon_heuristic",
    "extremal_solution",
    "functional_bound",
    "global_bounds",
    "landweber_pinv",
    "lift_matrix",
    "lift_system",
    "lift_vector",
    "nullspace_component",
    "orthogonal_to_nullspace",
    "pinv_apply",
    "pinv_transpose_apply",
    "pinv_transpose_norm",
    "power_iteration_sigma1",
    "residual_projection_norm",
    "stochastic_diag",
    "svd_truncated",
    "unlift_solution",
]
