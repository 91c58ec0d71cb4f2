"""Edge-flux discretization of the p-Laplacian plus zero-order terms.

A is assembled as the gradient of the discrete energy
    E(u) = h^dim [ (1/p) sum_edges |D^e u|_reg^p + (kappa/2) sum_i u_i^2 ]
scaled by 1/h^dim, so that inner_H(A(u), v) is the directional derivative of E.
"""

import numpy as np
import scipy.sparse as sp

from src.core.exceptions import SingularGradient
from src.core.grid import Field
from src.core.operators.base import CompatibilityData, OperatorSpec


def _regularized_magnitude(g: np.ndarray, delta: float) -> np.ndarray:
    return np.sqrt(g * g + delta * delta)


def _guard_singular(spec: OperatorSpec, g: np.ndarray) -> None:
    if spec.p < 2 and spec.reg == 0.0 and np.any(g == 0.0):
        raise SingularGradient("zero edge difference with p < 2 and delta_reg = 0")


def edge_flux(spec: OperatorSpec, g: np.ndarray) -> np.ndarray:
    """|g|_reg^{p-2} g, the derivative of |g|_reg^p / p."""
    _guard_singular(spec, g)
    if spec.p == 2.0:
        return g.copy()
    return _regularized_magnitude(g, spec.reg) ** (spec.p - 2.0) * g


def edge_flux_derivative(spec: OperatorSpec, g: np.ndarray) -> np.ndarray:
    """d/dg of the edge flux; nonnegative, which makes the Jacobian an M-matrix."""
    _guard_singular(spec, g)
    p, delta = spec.p, spec.reg
    if p == 2.0:
        return np.ones_like(g)
    if delta == 0.0:
        return (p - 1.0) * np.abs(g) ** (p - 2.0)
    mag = _regularized_magnitude(g, delta)
    return mag ** (p - 4.0) * ((p - 1.0) * g * g + delta * delta)


def edge_flux_secant(spec: OperatorSpec, g: np.ndarray) -> np.ndarray:
    """flux / g = |g|_reg^{p-2}. For p < 2 it bounds the derivative from above, so
    steps taken with it never cross past the root of a single edge equation."""
    _guard_singular(spec, g)
    if spec.p == 2.0:
        return np.ones_like(g)
    return _regularized_magnitude(g, spec.reg) ** (spec.p - 2.0)


def apply_A_flat(spec: OperatorSpec, grid_ops: tuple[sp.csr_matrix, ...], u: np.ndarray) -> np.ndarray:
    """apply_A on flat arrays (hot path of the Newton solvers)."""
    out = spec.kappa * u
    for d in grid_ops:
        out = out + d.T @ edge_flux(spec, d @ u)
    return out


def apply_A(spec: OperatorSpec, u: Field) -> Field:
    """Discrete p-Laplacian plus kappa u.

    For p = 2 and delta_reg = 0 this is the 3-point (1D) / 5-point (2D) Laplacian
    plus kappa times the identity.

    Raises:
        SingularGradient: p < 2, delta_reg = 0 and some edge difference vanishes
    """
    values = apply_A_flat(spec, u.grid.difference_operators, u.flat)
    return Field(u.grid, values)


def jacobian_A_flat(
    spec: OperatorSpec, grid_ops: tuple[sp.csr_matrix, ...], u: np.ndarray, secant: bool = False
) -> sp.csr_matrix:
    """Jacobian on flat arrays; ``secant`` swaps the edge derivative for edge_flux_secant."""
    n = u.size
    weigh = edge_flux_secant if secant else edge_flux_derivative
    jac = spec.kappa * sp.identity(n, format="csr")
    for d in grid_ops:
        weights = weigh(spec, d @ u)
        jac = jac + d.T @ sp.diags(weights) @ d
    return jac.tocsr()


def jacobian_A(spec: OperatorSpec, u: Field) -> sp.csr_matrix:
    """Derivative of apply_A at u: a weighted graph Laplacian plus kappa Id."""
    return jacobian_A_flat(spec, u.grid.difference_operators, u.flat)


def energy_flat(spec: OperatorSpec, grid_ops: tuple[sp.csr_matrix, ...], u: np.ndarray) -> float:
    """discrete_energy / h^dim on flat arrays; its gradient is apply_A_flat."""
    total = 0.5 * spec.kappa * float(np.dot(u, u))
    for d in grid_ops:
        g = d @ u
        total += float(np.sum(_regularized_magnitude(g, spec.reg) ** spec.p)) / spec.p
    return total


def discrete_energy(spec: OperatorSpec, u: Field) -> float:
    """The energy whose scaled gradient is apply_A."""
    return u.grid.cell_volume * energy_flat(spec, u.grid.difference_operators, u.flat)


def compute_compatibility(spec: OperatorSpec, psi: Field, f: Field) -> CompatibilityData:
    """h = f - A(psi) - gamma psi, split into nodal positive and negative parts."""
    h_field = f - apply_A(spec, psi) - spec.gamma * psi
    return CompatibilityData.from_field(h_field)
