"""Noise law: a truncated Q-Wiener process and the multiplicative coefficient G."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from src.core.exceptions import InvalidDt, InvariantViolation

DEFAULT_MODES = 16
DEFAULT_Q_DECAY = 1.0


class NoiseKind(str, Enum):
    """Noise family."""

    SCALAR = "scalar"
    MULTI_MODE = "multi_mode"
    BOUNDED_MULTI_MODE = "bounded_multi_mode"


@dataclass(frozen=True)
class NoiseSpec:
    """G(u) e_k = c (max(u, psi) - psi) sqrt(q_k) e_k, with q_k = k^{-(2 + q_decay)}.

    The scalar kind is the one-mode case q_1 = 1 with a spatially constant basis
    function, i.e. the example's ``c u d beta``.
    """

    kind: NoiseKind = NoiseKind.SCALAR
    c: float = 0.0
    modes: int = 1
    q_decay: float = DEFAULT_Q_DECAY
    clip: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind == NoiseKind.SCALAR:
            object.__setattr__(self, "modes", 1)
        if self.modes < 1:
            raise InvariantViolation(f"modes must be >= 1, got {self.modes}")
        if self.q_decay <= 0:
            raise InvariantViolation(f"q_decay must be > 0, got {self.q_decay}")
        if self.kind == NoiseKind.BOUNDED_MULTI_MODE:
            if self.clip is None or self.clip < 0:
                raise InvariantViolation("bounded_multi_mode noise needs clip >= 0")

    @property
    def eigenvalues(self) -> np.ndarray:
        """q_1..q_m of the truncated covariance."""
        if self.kind == NoiseKind.SCALAR:
            return np.ones(1)
        k = np.arange(1, self.modes + 1, dtype=float)
        return k ** (-(2.0 + self.q_decay))

    @property
    def trace_Q(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def L_G(self) -> float:
        """Lipschitz constant of G from H to L_2(H_0, H)."""
        return self.c**2 * self.trace_Q

    @property
    def M(self) -> float:
        """Growth constant of G; zero since G(psi) = 0."""
        return 0.0

    @property
    def Kbold(self) -> float:
        """Uniform bound on ||G(sigma)||^2_{L_2(H_0,H)}; finite only for clipped noise."""
        if self.kind != NoiseKind.BOUNDED_MULTI_MODE:
            return float("inf")
        return self.c**2 * self.trace_Q * float(self.clip or 0.0) ** 2

    @property
    def is_bounded(self) -> bool:
        return self.kind == NoiseKind.BOUNDED_MULTI_MODE

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary, derived constants included."""
        return {
            "kind": self.kind.value,
            "c": self.c,
            "modes": self.modes,
            "q_decay": self.q_decay,
            "clip": self.clip,
            "L_G": self.L_G,
            "trace_Q": self.trace_Q,
            "M": self.M,
            "Kbold": self.Kbold if self.is_bounded else None,
        }


@dataclass(frozen=True)
class NoiseIncrement:
    """Mode increments Delta beta_k ~ Normal(0, dt) for one step."""

    dt: float
    betas: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise InvalidDt(f"dt must be > 0, got {self.dt}")

    @classmethod
    def zero(cls, spec: NoiseSpec, dt: float) -> "NoiseIncrement":
        return cls(dt=dt, betas=np.zeros(spec.modes))
