"""Discrete analogues of the H = L^2, V = W^{1,p}_0 norms and the Poincare constant."""

from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from src.core.exceptions import InvalidExponent
from src.core.grid.base import Field, Grid

# Above this many unknowns the smallest eigenvalue comes from a sparse shift-invert solve.
DENSE_EIGEN_LIMIT = 4096


def edge_differences(u: Field) -> list[np.ndarray]:
    """Forward differences D^e u across every edge, one flat array per axis."""
    flat = u.flat
    return [d @ flat for d in u.grid.difference_operators]


def norm_H(u: Field) -> float:
    """Discrete L^2 norm (h^dim sum u_i^2)^(1/2)."""
    return float(np.sqrt(u.grid.cell_volume * np.dot(u.flat, u.flat)))


def inner_H(u: Field, v: Field) -> float:
    """Discrete L^2 scalar product h^dim sum u_i v_i.

    Raises:
        GridMismatch: the fields live on different grids
    """
    u._check(v)
    return float(u.grid.cell_volume * np.dot(u.flat, v.flat))


def norm_Vp(u: Field, p: float) -> float:
    """Discrete W^{1,p}_0 norm (h^dim sum_edges |D^e u|^p)^(1/p).

    Boundary edges are included, so the zero field is the only one with norm 0.
    """
    if p <= 1:
        raise InvalidExponent(f"p must be > 1, got {p}")
    total = sum(float(np.sum(np.abs(g) ** p)) for g in edge_differences(u))
    return float((u.grid.cell_volume * total) ** (1.0 / p))


def norm_Vp_power(u: Field, p: float) -> float:
    """||u||_V^p without the final root (the quantity integrated in tightness estimates)."""
    return norm_Vp(u, p) ** p


@lru_cache(maxsize=32)
def _smallest_laplacian_eigenvalue(grid: Grid) -> float:
    lap = grid.laplacian
    if grid.dof <= DENSE_EIGEN_LIMIT:
        values = scipy.linalg.eigh(
            lap.toarray(), eigvals_only=True, subset_by_index=[0, 0]
        )
        return float(values[0])
    values = scipy.sparse.linalg.eigsh(lap.tocsc(), k=1, sigma=0.0, which="LM", return_eigenvectors=False)
    return float(values[0])


def poincare_embedding_constant(grid: Grid) -> float:
    """Sharp discrete constant C_D with ||u||_H^2 <= C_D ||u||_V^2 (p = 2).

    Computed as 1/lambda_min of the discrete Dirichlet Laplacian.
    """
    return 1.0 / _smallest_laplacian_eigenvalue(grid)


def first_eigenvector(grid: Grid) -> Field:
    """Eigenvector of the discrete Laplacian for its smallest eigenvalue (positive, unit H-norm)."""
    _, vectors = scipy.linalg.eigh(grid.laplacian.toarray(), subset_by_index=[0, 0])
    vector = vectors[:, 0]
    vector = vector * np.sign(vector[np.argmax(np.abs(vector))])
    field = Field(grid, vector)
    return field * (1.0 / norm_H(field))


def analytic_poincare_constant(grid: Grid) -> float:
    """Closed form 1 / (dim * 4/h^2 sin^2(pi h/2)) of the same constant."""
    h = grid.h
    return 1.0 / (grid.dim * 4.0 / h**2 * np.sin(np.pi * h / 2.0) ** 2)
