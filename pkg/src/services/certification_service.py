"""Randomized certification suites for the operator and noise hypotheses."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import structlog

from src.core.grid import Field, Grid, build_grid
from src.core.noise import NoiseSpec, empirical_lipschitz
from src.core.operators import (
    OperatorSpec,
    apply_A_energy_gradient_check,
    check_coercivity,
    check_T_monotone,
)

logger = structlog.get_logger()

SLACK_TOL = -1e-9
GRADIENT_TOL = 1e-5
LIPSCHITZ_RTOL = 1e-10


@dataclass
class OperatorCertificate:
    p: float
    kappa: float
    t_monotone_slack: float
    coercivity_slack: float
    gradient_deviation: float

    @property
    def passed(self) -> bool:
        return (
            self.t_monotone_slack >= SLACK_TOL
            and self.coercivity_slack >= SLACK_TOL
            and self.gradient_deviation <= GRADIENT_TOL
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "kappa": self.kappa,
            "t_monotone_slack": self.t_monotone_slack,
            "coercivity_slack": self.coercivity_slack,
            "gradient_deviation": self.gradient_deviation,
            "passed": self.passed,
        }


@dataclass
class NoiseCertificate:
    kind: str
    c: float
    L_G: float
    max_ratio: float
    max_hilbert_schmidt_sq: float
    Kbold: Optional[float]

    @property
    def passed(self) -> bool:
        if self.max_ratio > self.L_G * (1.0 + LIPSCHITZ_RTOL) + 1e-300:
            return False
        if self.Kbold is not None and self.max_hilbert_schmidt_sq > self.Kbold * (1.0 + LIPSCHITZ_RTOL):
            return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "c": self.c,
            "L_G": self.L_G,
            "max_ratio": self.max_ratio,
            "max_hilbert_schmidt_sq": self.max_hilbert_schmidt_sq,
            "Kbold": self.Kbold,
            "passed": self.passed,
        }


class CertificationService:
    """Runs the randomized operator and noise checks over parameter grids."""

    def __init__(self, grid: Optional[Grid] = None):
        self.grid = grid or build_grid(1, 16)

    def run_operator_suite(
        self,
        p_values: Sequence[float],
        kappa_values: Sequence[float],
        trials: int,
        seed: int,
        gradient_points: int = 3,
    ) -> list[OperatorCertificate]:
        """T-monotonicity, coercivity and energy-gradient consistency per (p, kappa)."""
        rows = []
        rng = np.random.default_rng(seed)
        for p in p_values:
            for kappa in kappa_values:
                spec = OperatorSpec(p=float(p), kappa=float(kappa))
                t_slack = check_T_monotone(spec, trials, seed, grid=self.grid)
                coercivity = check_coercivity(spec, trials, seed + 1, grid=self.grid)
                deviation = max(
                    apply_A_energy_gradient_check(spec, Field(self.grid, rng.uniform(-1.0, 1.0, self.grid.shape)))
                    for _ in range(gradient_points)
                )
                row = OperatorCertificate(
                    p=float(p),
                    kappa=float(kappa),
                    t_monotone_slack=t_slack,
                    coercivity_slack=coercivity.slack,
                    gradient_deviation=deviation,
                )
                if not row.passed:
                    logger.warning("Operator certificate failed", **row.to_dict())
                rows.append(row)
        logger.info("Operator suite finished", cases=len(rows), failed=sum(not r.passed for r in rows))
        return rows

    def run_noise_suite(
        self,
        specs: Sequence[NoiseSpec],
        trials: int,
        seed: int,
    ) -> list[NoiseCertificate]:
        """Empirical Lipschitz ratio (and bounded-noise constant) per noise law."""
        rows = []
        for index, spec in enumerate(specs):
            check = empirical_lipschitz(spec, trials, seed + index, grid=self.grid)
            rows.append(
                NoiseCertificate(
                    kind=spec.kind.value,
                    c=spec.c,
                    L_G=spec.L_G,
                    max_ratio=check.max_ratio,
                    max_hilbert_schmidt_sq=check.max_hilbert_schmidt_sq,
                    Kbold=spec.Kbold if spec.is_bounded else None,
                )
            )
        return rows
