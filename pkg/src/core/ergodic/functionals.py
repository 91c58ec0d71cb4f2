"""Bounded Lipschitz test functionals for the ergodic averages."""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from src.core.exceptions import InvariantViolation
from src.core.grid import Field, norm_H


class FunctionalKind(str, Enum):
    CLIPPED_H_NORM = "clipped_h_norm"
    MEAN_VALUE = "mean_value"
    CONTACT_FRACTION = "contact_fraction"


def default_bound(psi: Field) -> float:
    """B = 10 ||psi||_H + 10."""
    return 10.0 * norm_H(psi) + 10.0


@dataclass(frozen=True)
class Functional:
    """phi(u), scaled by ``scale``; bounded by scale * bound."""

    kind: FunctionalKind
    bound: float
    scale: float
    evaluate_raw: Callable[[Field], float]

    @property
    def name(self) -> str:
        return self.kind.value

    def __call__(self, u: Field) -> float:
        return self.scale * self.evaluate_raw(u)


def build_functional(
    kind: Union[FunctionalKind, str],
    psi: Field,
    bound: Optional[float] = None,
    scale: float = 1.0,
) -> Functional:
    """Build one of the built-in functionals for a problem with obstacle psi.

    clipped_h_norm: min(||u||_H, B); mean_value: h^d sum u_i clipped to [-B, B];
    contact_fraction: share of nodes with u - psi < h.

    Raises:
        InvariantViolation: bound <= 0
    """
    kind = FunctionalKind(kind)
    B = default_bound(psi) if bound is None else float(bound)
    if not B > 0:
        raise InvariantViolation(f"functional bound must be > 0, got {B}")
    grid = psi.grid
    psi_flat = psi.flat

    if kind == FunctionalKind.CLIPPED_H_NORM:

        def evaluate(u: Field) -> float:
            return min(norm_H(u), B)

    elif kind == FunctionalKind.MEAN_VALUE:

        def evaluate(u: Field) -> float:
            return float(np.clip(grid.cell_volume * np.sum(u.flat), -B, B))

    else:

        def evaluate(u: Field) -> float:
            return float(np.mean(u.flat - psi_flat < grid.h))

    return Functional(kind=kind, bound=B, scale=float(scale), evaluate_raw=evaluate)
