"""Uniform grids on the unit box and nodal fields living on them."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from src.core.exceptions import GridMismatch, InvalidDimension, InvalidResolution, NonFiniteField

SUPPORTED_DIMENSIONS = (1, 2)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on (0,1)^dim with a homogeneous Dirichlet ghost layer.

    Only interior nodes carry unknowns; the boundary layer is implicitly zero.
    """

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in SUPPORTED_DIMENSIONS:
            raise InvalidDimension(f"dim must be one of {SUPPORTED_DIMENSIONS}, got {self.dim}")
        if self.n < 1:
            raise InvalidResolution(f"n must be a positive node count, got {self.n}")

    @property
    def h(self) -> float:
        """Grid spacing 1/(n+1)."""
        return 1.0 / (self.n + 1)

    @property
    def dof(self) -> int:
        """Number of interior degrees of freedom (n^dim)."""
        return self.n**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight h^dim attached to every node."""
        return self.h**self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Interior node coordinates along one axis."""
        return self.h * np.arange(1, self.n + 1)

    def node_coordinates(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays (one per axis) shaped like the grid."""
        axis = self.axis_coordinates()
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    @cached_property
    def difference_operators(self) -> tuple[sp.csr_matrix, ...]:
        """Forward-difference matrices, one per axis, including boundary edges.

        Row e of the axis matrix maps flat nodal values to D^e u = (u_right - u_left)/h,
        with ghost values zero. Shapes are ((n+1) n^(dim-1), n^dim).
        """
        n, h = self.n, self.h
        ones = np.ones(n)
        d1 = sp.diags([ones, -ones], offsets=[0, -1], shape=(n + 1, n), format="csr") / h
        if self.dim == 1:
            return (d1.tocsr(),)
        eye = sp.identity(n, format="csr")
        return (sp.kron(d1, eye, format="csr"), sp.kron(eye, d1, format="csr"))

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Discrete Dirichlet Laplacian sum_axis D^T D (3-point / 5-point stencil)."""
        total = sp.csr_matrix((self.dof, self.dof))
        for d in self.difference_operators:
            total = total + (d.T @ d)
        return total.tocsr()


def build_grid(dim: int, n: int) -> Grid:
    """Build a uniform grid with spacing 1/(n+1).

    Raises:
        InvalidDimension: dim not in {1, 2}
        InvalidResolution: n < 2
    """
    if int(n) < 2:
        raise InvalidResolution(f"n must be >= 2 interior nodes per axis, got {n}")
    return Grid(dim=int(dim), n=int(n))


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal real-valued function on a grid. Immutable once built."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.size != self.grid.dof:
            raise GridMismatch(
                f"field has {values.size} values but the grid has {self.grid.dof} nodes"
            )
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise NonFiniteField("field values must be finite (no NaN/Inf)")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @property
    def flat(self) -> np.ndarray:
        """Read-only flat view in C order."""
        return self.values.reshape(-1)

    def _check(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise GridMismatch(f"grids differ: {self.grid} vs {other.grid}")

    def _coerce(self, other: Union["Field", float, int]) -> Union[np.ndarray, float]:
        if isinstance(other, Field):
            self._check(other)
            return other.values
        return float(other)

    def __add__(self, other: Union["Field", float, int]) -> "Field":
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Union["Field", float, int]) -> "Field":
        return Field(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other: Union[float, int]) -> "Field":
        return Field(self.grid, float(other) - self.values)

    def __mul__(self, scalar: Union[float, int]) -> "Field":
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def positive_part(self) -> "Field":
        return Field(self.grid, np.maximum(self.values, 0.0))

    def negative_part(self) -> "Field":
        """Nodal (u)^- = max(0, -u)."""
        return Field(self.grid, np.maximum(-self.values, 0.0))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def allclose(self, other: "Field", atol: float = 0.0, rtol: float = 0.0) -> bool:
        self._check(other)
        return bool(np.allclose(self.values, other.values, atol=atol, rtol=rtol))


def field_from_function(grid: Grid, fn: Callable[..., np.ndarray]) -> Field:
    """Sample ``fn(x)`` (1D) or ``fn(x, y)`` (2D) at the interior nodes."""
    coords = grid.node_coordinates()
    values = np.broadcast_to(np.asarray(fn(*coords), dtype=float), grid.shape)
    return Field(grid, values)
