"""Exception hierarchy for the obstacle SPDE toolkit.

Two families matter to callers: ``InvariantViolation`` (bad input, caught
before computing) and ``SolverError`` (a numerical solve failed). The CLI maps
them to distinct exit codes.
"""

from typing import Optional


class ObstacleSimulationError(Exception):
    """Base class for all toolkit errors."""


class InvariantViolation(ObstacleSimulationError, ValueError):
    """An input violates a documented invariant."""


class SolverError(ObstacleSimulationError, RuntimeError):
    """A numerical solver failed to produce an admissible answer."""


# Grid / fields
class InvalidDimension(InvariantViolation):
    pass


class InvalidResolution(InvariantViolation):
    pass


class GridMismatch(InvariantViolation):
    pass


class NonFiniteField(InvariantViolation):
    pass


# Operators / penalty
class InvalidExponent(InvariantViolation):
    pass


class InvalidEpsilon(InvariantViolation):
    pass


# Noise / stepping
class InvalidDt(InvariantViolation):
    pass


class MonotonicityMarginViolated(InvariantViolation):
    pass


class ConstraintViolated(InvariantViolation):
    """Initial datum below the obstacle."""


class InvalidWindow(InvariantViolation):
    pass


# Configuration
class UnknownPreset(InvariantViolation):
    pass


class ConfigError(InvariantViolation):
    pass


# Solvers
class SingularGradient(SolverError):
    pass


class NewtonDiverged(SolverError):
    pass


class VISolverStalled(SolverError):
    pass


class StepFailed(SolverError):
    """A step of a trajectory failed; carries the step index."""

    def __init__(
        self,
        message: str,
        step_index: int,
        trajectory_id: Optional[int] = None,
    ):
        super().__init__(f"{message} (step {step_index}, trajectory {trajectory_id})")
        self.step_index = step_index
        self.trajectory_id = trajectory_id
