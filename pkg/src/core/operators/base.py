"""Operator data: the p-Laplacian family with zero-order terms, and compatibility data."""

from dataclasses import dataclass, field
from typing import Any, Optional

from src.core.exceptions import InvalidExponent, InvariantViolation
from src.core.grid import Field

# Gradient regularizer used for the singular range p < 2 when none is given.
DEFAULT_DELTA_REG = 1e-8


@dataclass(frozen=True)
class OperatorSpec:
    """A(u) = -div_h(|D u|_reg^{p-2} D u) + kappa u, plus the perturbation F(u) = gamma u.

    The derived constants are those of the discrete identity
    <A v, v> = ||v||_V^p + kappa ||v||_H^2 (exact when delta_reg = 0):
    alpha = 1, lambda = max(0, -kappa), lambda_T = -kappa, l1 = 0.
    """

    p: float
    kappa: float = 0.0
    gamma: float = 0.0
    delta_reg: Optional[float] = None

    def __post_init__(self) -> None:
        if self.p <= 1:
            raise InvalidExponent(f"p must be > 1, got {self.p}")
        delta_reg = self.delta_reg
        if delta_reg is None:
            delta_reg = DEFAULT_DELTA_REG if self.p < 2 else 0.0
            object.__setattr__(self, "delta_reg", delta_reg)
        if delta_reg < 0:
            raise InvariantViolation(f"delta_reg must be >= 0, got {delta_reg}")
        if delta_reg == 0 and self.p < 2:
            raise InvariantViolation("delta_reg = 0 is only permitted when p >= 2")

    @property
    def reg(self) -> float:
        """delta_reg as a float (resolved in __post_init__)."""
        return float(self.delta_reg or 0.0)

    @property
    def q_tilde(self) -> float:
        """Penalty exponent min(p, 2)."""
        return min(self.p, 2.0)

    @property
    def alpha(self) -> float:
        return 1.0

    @property
    def lam(self) -> float:
        """lambda of the coercivity hypothesis (0 when kappa >= 0)."""
        return max(0.0, -self.kappa)

    @property
    def lambda_T(self) -> float:
        return -self.kappa

    @property
    def l1(self) -> float:
        return 0.0

    @property
    def Kbar(self) -> float:
        """Boundedness constant; metadata only (exact for the p-Laplacian part)."""
        return 1.0

    @property
    def L_F(self) -> float:
        return abs(self.gamma)

    @property
    def F0(self) -> float:
        return 0.0

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary, derived constants included."""
        return {
            "p": self.p,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "delta_reg": self.reg,
            "alpha": self.alpha,
            "lambda": self.lam,
            "lambda_T": self.lambda_T,
            "l1": self.l1,
            "Kbar": self.Kbar,
            "L_F": self.L_F,
            "F0": self.F0,
        }


@dataclass(frozen=True)
class CompatibilityData:
    """h = f - A(psi) - gamma psi and its nodal positive / negative parts."""

    h_field: Field
    h_minus: Field = field(repr=False)
    h_plus: Field = field(repr=False)

    @classmethod
    def from_field(cls, h_field: Field) -> "CompatibilityData":
        return cls(
            h_field=h_field,
            h_minus=h_field.negative_part(),
            h_plus=h_field.positive_part(),
        )

    @property
    def h_minus_sup(self) -> float:
        return self.h_minus.sup_norm()
