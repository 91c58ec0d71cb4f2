"""Step configuration, per-step results and trajectories."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from src.core.exceptions import InvalidDt, InvalidEpsilon, InvalidExponent, MonotonicityMarginViolated
from src.core.grid import Field, Grid
from src.core.operators import OperatorSpec

DEFAULT_NEWTON_TOL = 1e-10
DEFAULT_NEWTON_MAX_ITERS = 50
DEFAULT_PEN_REG = 1e-10


class SolverKind(str, Enum):
    """How each implicit step enforces the obstacle."""

    PENALTY = "penalty"
    VI = "vi"


@dataclass(frozen=True)
class StepConfig:
    """Time step, penalization level and inner-solver tolerances."""

    dt: float
    epsilon: float
    q_tilde: float = 2.0
    newton_tol: float = DEFAULT_NEWTON_TOL
    newton_max_iters: int = DEFAULT_NEWTON_MAX_ITERS
    pen_reg: float = DEFAULT_PEN_REG

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise InvalidDt(f"dt must be > 0, got {self.dt}")
        if not self.epsilon > 0:
            raise InvalidEpsilon(f"epsilon must be > 0, got {self.epsilon}")
        if not 1.0 < self.q_tilde <= 2.0:
            raise InvalidExponent(f"q_tilde must lie in (1, 2], got {self.q_tilde}")

    @classmethod
    def for_operator(cls, ops: OperatorSpec, dt: float, epsilon: float, **kwargs: Any) -> "StepConfig":
        """Build a config with q_tilde = min(p, 2) and check the monotonicity margin."""
        cfg = cls(dt=dt, epsilon=epsilon, q_tilde=ops.q_tilde, **kwargs)
        cfg.validate_against(ops)
        return cfg

    def monotonicity_margin(self, ops: OperatorSpec) -> float:
        """1 - dt (max(0, -kappa) + max(0, -gamma)); must stay positive."""
        return 1.0 - self.dt * (max(0.0, -ops.kappa) + max(0.0, -ops.gamma))

    def validate_against(self, ops: OperatorSpec) -> None:
        """
        Raises:
            InvalidExponent: q_tilde differs from min(p, 2)
            MonotonicityMarginViolated: the implicit map is not monotone for this dt
        """
        if abs(self.q_tilde - ops.q_tilde) > 1e-12:
            raise InvalidExponent(f"q_tilde={self.q_tilde} must equal min(p, 2)={ops.q_tilde}")
        if self.monotonicity_margin(ops) <= 0:
            raise MonotonicityMarginViolated(
                f"dt (max(0,-kappa) + max(0,-gamma)) must be < 1; dt={self.dt}, "
                f"kappa={ops.kappa}, gamma={ops.gamma}"
            )

    def with_epsilon(self, epsilon: float) -> "StepConfig":
        return StepConfig(
            dt=self.dt,
            epsilon=epsilon,
            q_tilde=self.q_tilde,
            newton_tol=self.newton_tol,
            newton_max_iters=self.newton_max_iters,
            pen_reg=self.pen_reg,
        )

    def with_dt(self, dt: float) -> "StepConfig":
        return StepConfig(
            dt=dt,
            epsilon=self.epsilon,
            q_tilde=self.q_tilde,
            newton_tol=self.newton_tol,
            newton_max_iters=self.newton_max_iters,
            pen_reg=self.pen_reg,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "dt": self.dt,
            "epsilon": self.epsilon,
            "q_tilde": self.q_tilde,
            "newton_tol": self.newton_tol,
            "newton_max_iters": self.newton_max_iters,
            "pen_reg": self.pen_reg,
        }


@dataclass(frozen=True)
class StepResult:
    """Outcome of one implicit step."""

    u_next: Field
    multiplier: Field
    newton_iters: int
    residual: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states and multipliers of one path (flat arrays, one row per record)."""

    grid: Grid
    trajectory_id: int
    master_seed: int
    dt: float
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    multipliers: np.ndarray = field(repr=False)
    solver: SolverKind = SolverKind.PENALTY
    total_newton_iters: int = 0
    max_residual: float = 0.0

    def __post_init__(self) -> None:
        for array in (self.times, self.states, self.multipliers):
            array.flags.writeable = False

    def __len__(self) -> int:
        return int(self.times.size)

    def state(self, index: int) -> Field:
        return Field(self.grid, self.states[index])

    def multiplier(self, index: int) -> Field:
        return Field(self.grid, self.multipliers[index])

    def fields(self) -> list[Field]:
        return [self.state(i) for i in range(len(self))]
