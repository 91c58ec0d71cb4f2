"""Utility functions and helpers."""

from src.utils.helpers import (
    calculate_hash,
    format_duration,
    format_float,
    generate_timestamp,
    to_jsonable,
)
from src.utils.logging import bind_run_context, in_current_context, setup_logging

__all__ = [
    "setup_logging",
    "bind_run_context",
    "in_current_context",
    "calculate_hash",
    "format_duration",
    "format_float",
    "generate_timestamp",
    "to_jsonable",
]
