"""CSV and flat-binary codecs for nodal fields."""

import csv
import io
from pathlib import Path
from typing import Optional

import numpy as np

from src.core.exceptions import GridMismatch
from src.core.grid.base import Field, Grid
from src.utils.helpers import format_float

HEADER_DTYPE = np.dtype("<i8")
VALUE_DTYPE = np.dtype("<f8")
HEADER_BYTES = 2 * HEADER_DTYPE.itemsize

_INDEX_NAMES = ("i", "j")
_COORD_NAMES = ("x", "y")


def field_to_csv(field: Field, path: Optional[Path] = None) -> str:
    """Serialize a field to CSV, one row per node: index columns, coordinates, value."""
    grid = field.grid
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*_INDEX_NAMES[: grid.dim], *_COORD_NAMES[: grid.dim], "value"])
    axis = grid.axis_coordinates()
    for index in np.ndindex(*grid.shape):
        coords = [format_float(axis[k]) for k in index]
        writer.writerow([*index, *coords, format_float(field.values[index])])
    text = buffer.getvalue()
    if path is not None:
        path.write_text(text, encoding="utf-8")
    return text


def field_from_csv(text: str) -> Field:
    """Parse the CSV produced by ``field_to_csv``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    dim = len(header) // 2
    rows = [row for row in reader if row]
    n = round(len(rows) ** (1.0 / dim))
    grid = Grid(dim=dim, n=n)
    values = np.zeros(grid.shape)
    for row in rows:
        index = tuple(int(v) for v in row[:dim])
        values[index] = float(row[-1])
    return Field(grid, values)


def field_to_bytes(field: Field) -> bytes:
    """Flat binary: 16-byte header (dim, n as little-endian int64) then float64 values."""
    header = np.array([field.grid.dim, field.grid.n], dtype=HEADER_DTYPE).tobytes()
    return header + field.flat.astype(VALUE_DTYPE).tobytes()


def field_from_bytes(payload: bytes) -> Field:
    """Decode ``field_to_bytes`` output."""
    dim, n = np.frombuffer(payload[:HEADER_BYTES], dtype=HEADER_DTYPE)
    grid = Grid(dim=int(dim), n=int(n))
    values = np.frombuffer(payload[HEADER_BYTES:], dtype=VALUE_DTYPE)
    if values.size != grid.dof:
        raise GridMismatch(f"payload carries {values.size} values for a grid of {grid.dof}")
    return Field(grid, values)
