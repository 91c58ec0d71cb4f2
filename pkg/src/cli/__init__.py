"""Experiment commands and scenario presets."""

from src.cli.commands import COMMANDS, CommandResult, RunContext, run_command
from src.cli.presets import (
    DEFAULT_DT,
    DEFAULT_EPSILON,
    DEFAULT_N,
    PRESETS,
    build_field,
    build_problem,
    build_step_config,
    preset,
    preset_names,
    resolve_scenario,
)

__all__ = [
    "COMMANDS",
    "CommandResult",
    "DEFAULT_DT",
    "DEFAULT_EPSILON",
    "DEFAULT_N",
    "PRESETS",
    "RunContext",
    "build_field",
    "build_problem",
    "build_step_config",
    "preset",
    "preset_names",
    "resolve_scenario",
    "run_command",
]
