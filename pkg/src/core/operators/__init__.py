"""The T-monotone operator family, the penalty term and their certification."""

from src.core.operators.base import CompatibilityData, OperatorSpec
from src.core.operators.certification import (
    CoercivityCheck,
    apply_A_energy_gradient_check,
    check_coercivity,
    check_T_monotone,
    t_monotonicity_slack,
)
from src.core.operators.p_laplacian import (
    apply_A,
    compute_compatibility,
    discrete_energy,
    jacobian_A,
)
from src.core.operators.penalty import penalty_force

__all__ = [
    "CompatibilityData",
    "OperatorSpec",
    "CoercivityCheck",
    "apply_A_energy_gradient_check",
    "check_coercivity",
    "check_T_monotone",
    "t_monotonicity_slack",
    "apply_A",
    "compute_compatibility",
    "discrete_energy",
    "jacobian_A",
    "penalty_force",
]
