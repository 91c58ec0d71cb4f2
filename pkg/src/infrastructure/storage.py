"""Artifact storage for experiment tables and summaries."""

import csv
import io
import json
from pathlib import Path
from typing import Any, Optional

from src import __version__
from src.config import get_settings
from src.utils.helpers import calculate_hash, format_float, generate_timestamp, to_jsonable


def render_csv(rows: list[dict[str, Any]]) -> str:
    """CSV text with a header line; floats are written so they round-trip exactly."""
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(row[key]) if isinstance(row[key], float) else row[key] for key in header]
        )
    return buffer.getvalue()


class ResultStorage:
    """Writes ``<command>_<timestamp>.csv``, ``.json`` and ``.toml`` under the output directory."""

    def __init__(self, base_dir: Optional[Path] = None):
        self.base_dir = Path(base_dir or get_settings().output_dir)
        self._ensure_dir()

    def _ensure_dir(self) -> None:
        """Ensure storage directory exists."""
        self.base_dir.mkdir(parents=True, exist_ok=True)

    def save(
        self,
        command: str,
        rows: list[dict[str, Any]],
        summary: dict[str, Any],
        timestamp: Optional[str] = None,
        config_toml: Optional[str] = None,
    ) -> tuple[Path, Path]:
        """
        Save one experiment's table and summary.

        When ``config_toml`` is given it is written to ``<stem>.toml`` so the run
        can be repeated with ``--config``. Returns the paths of the CSV and JSON files.
        """
        timestamp = timestamp or generate_timestamp()
        stem = f"{command}_{timestamp}"
        csv_path = self.base_dir / f"{stem}.csv"
        json_path = self.base_dir / f"{stem}.json"

        csv_path.write_text(render_csv(rows), encoding="utf-8")
        payload = {
            **to_jsonable(summary),
            "command": command,
            "timestamp": timestamp,
            "version": __version__,
        }
        if isinstance(summary.get("config"), dict):
            payload["config_hash"] = calculate_hash(payload["config"])
        json_path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
        if config_toml is not None:
            (self.base_dir / f"{stem}.toml").write_text(config_toml, encoding="utf-8")
        return csv_path, json_path
