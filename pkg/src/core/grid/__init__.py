"""Discrete function spaces: grids, nodal fields and their norms."""

from src.core.grid.base import Field, Grid, build_grid, field_from_function
from src.core.grid.io import field_from_bytes, field_from_csv, field_to_bytes, field_to_csv
from src.core.grid.norms import (
    edge_differences,
    first_eigenvector,
    inner_H,
    norm_H,
    norm_Vp,
    norm_Vp_power,
    poincare_embedding_constant,
)

__all__ = [
    "Field",
    "Grid",
    "build_grid",
    "field_from_function",
    "field_from_bytes",
    "field_from_csv",
    "field_to_bytes",
    "field_to_csv",
    "edge_differences",
    "first_eigenvector",
    "inner_H",
    "norm_H",
    "norm_Vp",
    "norm_Vp_power",
    "poincare_embedding_constant",
]
