"""Infrastructure layer: result persistence."""

from src.infrastructure.storage import ResultStorage, render_csv

__all__ = [
    "ResultStorage",
    "render_csv",
]
