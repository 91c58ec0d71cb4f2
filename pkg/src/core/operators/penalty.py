"""Penalty nonlinearity -(1/eps) [(u - psi)^-]^{q-1}, its inverse and their checks."""

import numpy as np

from src.core.exceptions import InvalidEpsilon, InvalidExponent
from src.core.grid import Field


def _validate(epsilon: float, q_tilde: float) -> None:
    if not epsilon > 0:
        raise InvalidEpsilon(f"epsilon must be > 0, got {epsilon}")
    if not 1.0 < q_tilde <= 2.0:
        raise InvalidExponent(f"q_tilde must lie in (1, 2], got {q_tilde}")


def penalty_values(u: np.ndarray, psi: np.ndarray, epsilon: float, q_tilde: float) -> np.ndarray:
    gap = np.maximum(psi - u, 0.0)
    if q_tilde == 2.0:
        return -gap / epsilon
    return -(gap ** (q_tilde - 1.0)) / epsilon


def penalty_gap(force: np.ndarray, epsilon: float, q_tilde: float) -> np.ndarray:
    """The gap psi - u at which -penalty_values equals ``force``; zero for force <= 0.

    Unlike penalty_values it is smooth at the kink for every q_tilde, which is
    why the penalized Newton solver carries the force as an unknown.
    """
    scaled = epsilon * np.maximum(force, 0.0)
    if q_tilde == 2.0:
        return scaled
    return scaled ** (1.0 / (q_tilde - 1.0))


def penalty_gap_derivative(
    force: np.ndarray, epsilon: float, q_tilde: float, pen_reg: float = 0.0
) -> np.ndarray:
    """d/dforce of penalty_gap, floored at pen_reg where it vanishes at the q < 2 kink."""
    if q_tilde == 2.0:
        return np.full_like(force, epsilon)
    power = 1.0 / (q_tilde - 1.0)
    slope = power * epsilon * (epsilon * np.maximum(force, 0.0)) ** (power - 1.0)
    return np.maximum(slope, pen_reg)


def penalty_force(u: Field, psi: Field, epsilon: float, q_tilde: float) -> Field:
    """Nodal -(1/eps) max(0, psi_i - u_i)^{q-1}; nonpositive, zero where u >= psi.

    Raises:
        InvalidEpsilon: epsilon <= 0
    """
    _validate(epsilon, q_tilde)
    u._check(psi)
    return Field(u.grid, penalty_values(u.flat, psi.flat, epsilon, q_tilde))
