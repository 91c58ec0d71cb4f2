"""Parallel fan-out of independent trajectories."""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, TypeVar

import structlog

from src.config import get_settings
from src.utils.logging import in_current_context

logger = structlog.get_logger()

T = TypeVar("T")


class EnsembleService:
    """Runs per-trajectory work on a thread pool.

    Results always come back in the order of the ids passed in, and each
    trajectory draws from its own counter-based stream, so reductions over
    the results do not depend on the worker count.
    """

    def __init__(self, threads: Optional[int] = None, master_seed: Optional[int] = None):
        settings = get_settings()
        self.threads = threads or settings.worker_count
        self.master_seed = settings.master_seed if master_seed is None else master_seed

    def map(self, fn: Callable[[int], T], ids: Sequence[int]) -> list[T]:
        """Apply ``fn`` to every id; results ordered like ``ids``."""
        ids = list(ids)
        if self.threads <= 1 or len(ids) <= 1:
            return [fn(i) for i in ids]
        workers = min(self.threads, len(ids))
        logger.debug("Fanning out ensemble", n_items=len(ids), workers=workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(in_current_context(fn), ids))
