"""The multiplicative diffusion coefficient G and its Lipschitz bookkeeping."""

from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from src.core.grid import Field, Grid, build_grid, norm_H
from src.core.noise.base import NoiseIncrement, NoiseKind, NoiseSpec


class LipschitzCheck(NamedTuple):
    """Worst observed ratio against L_G and the largest ||G(sigma)||^2 seen."""

    max_ratio: float
    max_hilbert_schmidt_sq: float


def _mode_indices(dim: int, modes: int) -> list[tuple[int, ...]]:
    """First ``modes`` sine multi-indices ordered by Laplacian eigenvalue."""
    if dim == 1:
        return [(k,) for k in range(1, modes + 1)]
    side = int(np.ceil(np.sqrt(modes))) + 1
    pairs = [(i, j) for i in range(1, side + 1) for j in range(1, side + 1)]
    pairs.sort(key=lambda ij: (ij[0] ** 2 + ij[1] ** 2, ij))
    return pairs[:modes]


@lru_cache(maxsize=64)
def sine_basis(grid: Grid, modes: int) -> np.ndarray:
    """L^2-normalized Dirichlet sine basis at the nodes, shape (modes, dof)."""
    coords = grid.node_coordinates()
    rows = []
    for index in _mode_indices(grid.dim, modes):
        values = np.ones(grid.shape)
        for k, x in zip(index, coords):
            values = values * np.sqrt(2.0) * np.sin(k * np.pi * x)
        rows.append(values.reshape(-1))
    basis = np.array(rows)
    basis.flags.writeable = False
    return basis


def multiplicative_factor(spec: NoiseSpec, u: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Pointwise factor max(u, psi) - psi, clamped to [0, clip] for bounded noise."""
    factor = np.maximum(u - psi, 0.0)
    if spec.kind == NoiseKind.BOUNDED_MULTI_MODE:
        factor = np.minimum(factor, float(spec.clip or 0.0))
    return factor


def noise_profile(spec: NoiseSpec, grid: Grid, betas: np.ndarray) -> np.ndarray:
    """sum_k sqrt(q_k) e_k(x) Delta beta_k as a flat array (constant for scalar noise)."""
    if spec.kind == NoiseKind.SCALAR:
        return np.full(grid.dof, float(betas[0]))
    weights = np.sqrt(spec.eigenvalues) * betas
    return weights @ sine_basis(grid, spec.modes)


def apply_G_flat(
    spec: NoiseSpec, grid: Grid, u: np.ndarray, psi: np.ndarray, betas: np.ndarray
) -> np.ndarray:
    factor = multiplicative_factor(spec, u, psi)
    if spec.c == 0.0:
        return np.zeros_like(u)
    out = spec.c * factor * noise_profile(spec, grid, betas)
    # exact zeros on the contact set (no signed zeros)
    return np.where(factor > 0.0, out, 0.0)


def apply_G(spec: NoiseSpec, u: Field, psi: Field, inc: NoiseIncrement) -> Field:
    """G(max(u, psi)) dW over one step; vanishes identically where u <= psi.

    Raises:
        GridMismatch: u and psi live on different grids
    """
    u._check(psi)
    return Field(u.grid, apply_G_flat(spec, u.grid, u.flat, psi.flat, inc.betas))


def hilbert_schmidt_sq(spec: NoiseSpec, u: Field, psi: Field) -> float:
    """||G(u)||^2_{L_2(H_0, H)} = sum_k q_k ||c g(u)||_H^2 for the concrete family."""
    factor = Field(u.grid, spec.c * multiplicative_factor(spec, u.flat, psi.flat))
    return spec.trace_Q * norm_H(factor) ** 2


def empirical_lipschitz(
    spec: NoiseSpec,
    trials: int,
    rng_seed: int,
    grid: Optional[Grid] = None,
    psi: Optional[Field] = None,
    nonnegative: bool = False,
) -> LipschitzCheck:
    """sup over random pairs of sum_k q_k ||g(theta) - g(sigma)||_H^2 / ||theta - sigma||_H^2.

    Pairs with theta = sigma are skipped; ``nonnegative`` keeps both fields above psi. Must stay below L_G (1 + 1e-10); for clipped
    noise the largest ||G(sigma)||^2 must also stay below Kbold.
    """
    grid = grid if grid is not None else build_grid(1, 16)
    psi = psi if psi is not None else Field.zeros(grid)
    rng = np.random.default_rng(rng_seed)
    worst_ratio = 0.0
    worst_hs = 0.0
    for _ in range(max(1, trials)):
        scale = 10.0 ** rng.uniform(-1.0, 1.0)
        draws = scale * rng.standard_normal((2, *grid.shape))
        if nonnegative:
            draws = np.abs(draws)
        theta = psi + Field(grid, draws[0])
        sigma = psi + Field(grid, draws[1])
        gap_sq = norm_H(theta - sigma) ** 2
        worst_hs = max(worst_hs, hilbert_schmidt_sq(spec, theta, psi))
        if gap_sq == 0.0:
            continue
        g_theta = spec.c * multiplicative_factor(spec, theta.flat, psi.flat)
        g_sigma = spec.c * multiplicative_factor(spec, sigma.flat, psi.flat)
        diff_sq = norm_H(Field(grid, g_theta - g_sigma)) ** 2
        worst_ratio = max(worst_ratio, spec.trace_Q * diff_sq / gap_sq)
    return LipschitzCheck(max_ratio=worst_ratio, max_hilbert_schmidt_sq=worst_hs)
