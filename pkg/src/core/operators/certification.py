"""Numerical certification of the operator hypotheses (coercivity, T-monotonicity).

Each check draws random field pairs from a seeded numpy Generator and reports the
worst case it saw; none of them raises on failure, the caller judges the slack.
"""

from typing import NamedTuple, Optional

import numpy as np

from src.core.grid import Field, Grid, build_grid, inner_H, norm_H, norm_Vp
from src.core.operators.base import OperatorSpec
from src.core.operators.p_laplacian import apply_A, discrete_energy

FD_STEP = 1e-5


class CoercivityCheck(NamedTuple):
    """Observed minimum of (<A v, v> + lambda ||v||_H^2) / ||v||_V^p."""

    empirical_alpha: float
    worst_ratio: float

    @property
    def slack(self) -> float:
        """worst_ratio minus the claimed alpha = 1."""
        return self.worst_ratio - 1.0


def _default_grid(grid: Optional[Grid]) -> Grid:
    return grid if grid is not None else build_grid(1, 16)


def _random_field(grid: Grid, rng: np.random.Generator) -> Field:
    amplitude = 10.0 ** rng.uniform(-1.0, 0.5)
    return Field(grid, amplitude * rng.standard_normal(grid.shape))


def apply_A_energy_gradient_check(spec: OperatorSpec, u: Field, step: float = FD_STEP) -> float:
    """Max deviation between apply_A and central differences of the discrete energy."""
    grid = u.grid
    base = u.flat
    analytic = apply_A(spec, u).flat
    numeric = np.empty_like(base)
    for i in range(base.size):
        bump = np.zeros_like(base)
        bump[i] = step
        e_plus = discrete_energy(spec, Field(grid, base + bump))
        e_minus = discrete_energy(spec, Field(grid, base - bump))
        numeric[i] = (e_plus - e_minus) / (2.0 * step * grid.cell_volume)
    return float(np.max(np.abs(numeric - analytic)))


def t_monotonicity_slack(spec: OperatorSpec, v1: Field, v2: Field) -> float:
    """lambda_T (w, w^+)_H + <A(v1) - A(v2), w^+> with w = v1 - v2."""
    w = v1 - v2
    w_plus = w.positive_part()
    pairing = inner_H(apply_A(spec, v1) - apply_A(spec, v2), w_plus)
    return spec.lambda_T * inner_H(w, w_plus) + pairing


def check_T_monotone(
    spec: OperatorSpec,
    trials: int,
    rng_seed: int,
    grid: Optional[Grid] = None,
) -> float:
    """Minimum T-monotonicity slack over ``trials`` random pairs (>= -rounding when correct)."""
    grid = _default_grid(grid)
    rng = np.random.default_rng(rng_seed)
    worst = np.inf
    for _ in range(max(1, trials)):
        v1 = _random_field(grid, rng)
        v2 = _random_field(grid, rng)
        worst = min(worst, t_monotonicity_slack(spec, v1, v2))
    return float(worst)


def coercivity_ratio(spec: OperatorSpec, v: Field) -> Optional[float]:
    """(<A v, v> + lambda ||v||_H^2 + l1) / ||v||_V^p, or None for the zero field."""
    denominator = norm_Vp(v, spec.p) ** spec.p
    if denominator == 0.0:
        return None
    numerator = inner_H(apply_A(spec, v), v) + spec.lam * norm_H(v) ** 2 + spec.l1
    return numerator / denominator


def check_coercivity(
    spec: OperatorSpec,
    trials: int,
    rng_seed: int,
    grid: Optional[Grid] = None,
) -> CoercivityCheck:
    """Empirical coercivity constant over random fields; zero fields are skipped."""
    grid = _default_grid(grid)
    rng = np.random.default_rng(rng_seed)
    ratios = []
    for _ in range(max(1, trials)):
        ratio = coercivity_ratio(spec, _random_field(grid, rng))
        if ratio is not None:
            ratios.append(ratio)
    worst = float(min(ratios)) if ratios else float("nan")
    return CoercivityCheck(empirical_alpha=worst, worst_ratio=worst / spec.alpha)
