"""General utility functions."""

import hashlib
import json
import math
from datetime import datetime, timezone
from typing import Any


def generate_timestamp() -> str:
    """Generate a filesystem-safe UTC timestamp for artifact names."""
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")


def calculate_hash(payload: dict[str, Any]) -> str:
    """Calculate SHA-256 hash of a JSON-serializable payload (key order independent)."""
    content = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(content).hexdigest()


def format_float(value: float) -> str:
    """Format a float so that it round-trips exactly through text."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars, arrays and non-finite floats into JSON-safe values."""
    if hasattr(value, "tolist"):
        return to_jsonable(value.tolist())
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def format_duration(seconds: float) -> str:
    """Format elapsed seconds to a human readable string."""
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, rest = divmod(seconds, 60)
    return f"{int(minutes)}m{rest:04.1f}s"
