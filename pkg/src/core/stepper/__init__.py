"""Time stepping of the penalized obstacle equation and its exact reference."""

from src.core.stepper.base import SolverKind, StepConfig, StepResult, Trajectory
from src.core.stepper.newton import extract_multiplier, semi_implicit_step
from src.core.stepper.trajectory import simulate_trajectory, step_count, trajectory_summary
from src.core.stepper.vi_solver import vi_multiplier, vi_reference_step

__all__ = [
    "SolverKind",
    "StepConfig",
    "StepResult",
    "Trajectory",
    "extract_multiplier",
    "semi_implicit_step",
    "simulate_trajectory",
    "step_count",
    "trajectory_summary",
    "vi_multiplier",
    "vi_reference_step",
]
