"""The full problem tuple (A, G, psi, f, u0) on a grid."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from src.core.exceptions import ConstraintViolated, GridMismatch
from src.core.grid import Field, Grid, norm_H
from src.core.noise import NoiseSpec
from src.core.operators import CompatibilityData, OperatorSpec, compute_compatibility

# u0 >= psi is checked up to this absolute slack
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """du + A(u) dt + gamma u dt + k dt = f dt + G(u) dW, u >= psi, u(0) = u0."""

    grid: Grid
    operator: OperatorSpec
    noise: NoiseSpec
    psi: Field = field(repr=False)
    f: Field = field(repr=False)
    u0: Field = field(repr=False)
    name: str = "custom"

    def __post_init__(self) -> None:
        for name, item in (("psi", self.psi), ("f", self.f), ("u0", self.u0)):
            if item.grid != self.grid:
                raise GridMismatch(f"{name} lives on {item.grid}, problem grid is {self.grid}")
        self.check_admissible(self.u0)

    def check_admissible(self, start: Field, name: str = "u0") -> None:
        """
        Raises:
            GridMismatch: start lives on another grid
            ConstraintViolated: start < psi - CONSTRAINT_TOL at some node
        """
        self.psi._check(start)
        if np.any(start.values < self.psi.values - CONSTRAINT_TOL):
            raise ConstraintViolated(f"{name} must satisfy {name} >= psi nodally")

    @property
    def d(self) -> int:
        return self.grid.dim

    @cached_property
    def compatibility(self) -> CompatibilityData:
        return compute_compatibility(self.operator, self.psi, self.f)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary (fields summarized by norms)."""
        return {
            "name": self.name,
            "grid": {"dim": self.grid.dim, "n": self.grid.n, "h": self.grid.h},
            "operator": self.operator.to_dict(),
            "noise": self.noise.to_dict(),
            "psi_norm_H": norm_H(self.psi),
            "f_norm_H": norm_H(self.f),
            "u0_norm_H": norm_H(self.u0),
            "h_minus_sup": self.compatibility.h_minus_sup,
        }
