"""Structured logging configuration."""

import contextvars
import logging
import sys
from collections.abc import Callable
from typing import Any, Optional, TypeVar

import structlog

from src.config import get_settings

T = TypeVar("T")


def setup_logging(log_level: Optional[str] = None) -> None:
    """Configure structured logging for experiment runs.

    Records go to stderr; stdout carries only the one-line command summary.
    Context bound with :func:`bind_run_context` is merged into every record.
    """
    settings = get_settings()
    level = getattr(logging, (log_level or settings.log_level).upper())

    renderer: Any = (
        structlog.dev.ConsoleRenderer()
        if settings.is_development
        else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        # setup_logging may run again with another level in the same process
        cache_logger_on_first_use=False,
    )

    # scipy warnings and friends
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)


def bind_run_context(command: str, master_seed: int, config_hash: str) -> None:
    """Tag every following record with the command, seed and config identity."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(
        command=command, master_seed=master_seed, config_hash=config_hash[:12]
    )


def in_current_context(fn: Callable[[int], T]) -> Callable[[int], T]:
    """Wrap ``fn`` so worker threads log with the caller's bound context."""
    parent = contextvars.copy_context()

    def run(item: int) -> T:
        return parent.copy().run(fn, item)

    return run
