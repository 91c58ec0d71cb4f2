"""Report types of the long-time and penalization experiments.

Every report converts to a JSON-ready dict (``to_dict``) and to the rows of
its CSV table (``table``).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from src.utils.helpers import to_jsonable


class PCase(str, Enum):
    GT2 = "pGT2"
    EQ2 = "pEQ2"
    LT2 = "pLT2"


class Existence(str, Enum):
    """Strongest certified existence conclusion."""

    ERGODIC_INVARIANT = "ergodic-invariant"
    INVARIANT = "invariant"
    NONE_CERTIFIED = "none-certified"


class FitStatus(str, Enum):
    FITTED = "fitted"
    DEGENERATE = "degenerate"
    SIGNAL_BELOW_NOISE = "SignalBelowNoise"


@dataclass
class RegimeReport:
    """Which existence/uniqueness statements the problem's constants certify."""

    p_case: PCase
    existence: Existence
    uniqueness: bool
    admissible: bool
    cond_invariant_slack: float
    bounded_noise: bool
    gamma_condition: float
    uniqueness_margin: float
    K_opt: float
    example_margin: float
    example_holds: bool
    C_D: float
    L_G: float
    delta: float
    lambda_eff: float
    lambda_T_eff: float
    gamma_eff: float
    K_grid: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    cond_invariant_by_K: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    gamma_condition_by_K: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def table(self) -> list[dict[str, float]]:
        return [
            {"K": float(k), "cond_invariant_slack": float(c), "gamma_condition_slack": float(g)}
            for k, c, g in zip(self.K_grid, self.cond_invariant_by_K, self.gamma_condition_by_K)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_case": self.p_case.value,
            "existence": self.existence.value,
            "uniqueness": self.uniqueness,
            "admissible": self.admissible,
            "cond_invariant_slack": self.cond_invariant_slack,
            "bounded_noise": self.bounded_noise,
            "gamma_condition": self.gamma_condition,
            "uniqueness_margin": self.uniqueness_margin,
            "K_opt": self.K_opt,
            "example_margin": self.example_margin,
            "example_holds": self.example_holds,
            "C_D": self.C_D,
            "L_G": self.L_G,
            "delta": self.delta,
            "lambda_eff": self.lambda_eff,
            "lambda_T_eff": self.lambda_T_eff,
            "gamma_eff": self.gamma_eff,
        }


@dataclass
class CouplingFit:
    """Mean squared gap of shared-noise pairs and its exponential fit."""

    times: np.ndarray
    mean_sq_gap: np.ndarray
    stderr: np.ndarray
    fitted_exponent: Optional[float]
    theoretical_exponent: float
    n_paths: int
    ci_halfwidth: Optional[float]
    initial_sq_gap: float
    status: FitStatus = FitStatus.FITTED

    @property
    def bound(self) -> np.ndarray:
        """exp(theoretical_exponent t) ||x - y||_H^2."""
        return np.exp(self.theoretical_exponent * self.times) * self.initial_sq_gap

    @property
    def feller_bound_holds(self) -> bool:
        """Estimate minus two stderr stays below the contraction bound at every t."""
        slack = 1e-12 * max(1.0, self.initial_sq_gap)
        return bool(np.all(self.mean_sq_gap - 2.0 * self.stderr <= self.bound + slack))

    def table(self) -> list[dict[str, float]]:
        bound = self.bound
        return [
            {"t": float(t), "mean_sq_gap": float(m), "stderr": float(s), "bound": float(b)}
            for t, m, s, b in zip(self.times, self.mean_sq_gap, self.stderr, bound)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "fitted_exponent": self.fitted_exponent,
            "theoretical_exponent": self.theoretical_exponent,
            "n_paths": self.n_paths,
            "ci_halfwidth": self.ci_halfwidth,
            "initial_sq_gap": self.initial_sq_gap,
            "feller_bound_holds": self.feller_bound_holds,
            "status": self.status.value,
        }


@dataclass
class ErgodicEstimate:
    """Time-then-ensemble average of a functional over [burn_in, horizon]."""

    functional: str
    horizon: float
    burn_in: float
    kb_average: float
    stderr: float
    n_paths: int
    per_path: np.ndarray = field(repr=False)
    label: str = "u0"
    min_gap: float = 0.0
    mean_Vp_power: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "functional": self.functional,
            "label": self.label,
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "kb_average": self.kb_average,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "min_gap": self.min_gap,
            "mean_Vp_power": self.mean_Vp_power,
        }


@dataclass
class ErgodicAgreement:
    """Two ergodic estimates compared within their joint standard error."""

    first: ErgodicEstimate
    second: ErgodicEstimate
    n_stderr: float = 3.0
    rel_tol: float = 0.05

    @property
    def difference(self) -> float:
        return abs(self.first.kb_average - self.second.kb_average)

    @property
    def joint_stderr(self) -> float:
        return float(np.hypot(self.first.stderr, self.second.stderr))

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.first.kb_average), abs(self.second.kb_average))
        return self.difference / scale if scale > 0 else 0.0

    @property
    def within_stderr(self) -> bool:
        return self.difference <= self.n_stderr * self.joint_stderr + 1e-12

    @property
    def passed(self) -> bool:
        return self.within_stderr and self.relative_gap <= self.rel_tol

    def table(self) -> list[dict[str, Any]]:
        return [
            {
                "label": e.label,
                "kb_average": e.kb_average,
                "stderr": e.stderr,
                "min_gap": e.min_gap,
                "mean_Vp_power": e.mean_Vp_power,
            }
            for e in (self.first, self.second)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "difference": self.difference,
            "joint_stderr": self.joint_stderr,
            "relative_gap": self.relative_gap,
            "within_stderr": self.within_stderr,
            "passed": self.passed,
        }


@dataclass
class EquilibriumReport:
    """|P_t phi(x) - mu(phi)| over time with the reference mu(phi) from one long run."""

    functional: str
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    reference: float
    reference_stderr: float
    fitted_exponent: Optional[float]
    theoretical_exponent: float
    status: FitStatus
    uniqueness_certified: bool
    n_paths: int

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.values - self.reference)

    @property
    def gap_stderr(self) -> np.ndarray:
        return np.hypot(self.stderr, self.reference_stderr)

    @property
    def resolved(self) -> np.ndarray:
        """Gaps above three standard errors and above the rounding floor."""
        floor = 1e-12 * max(1.0, abs(self.reference))
        return self.gaps > 3.0 * self.gap_stderr + floor

    def table(self) -> list[dict[str, float]]:
        return [
            {"t": float(t), "value": float(v), "gap": float(g), "stderr": float(s)}
            for t, v, g, s in zip(self.times, self.values, self.gaps, self.gap_stderr)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "functional": self.functional,
            "reference": self.reference,
            "reference_stderr": self.reference_stderr,
            "fitted_exponent": self.fitted_exponent,
            "theoretical_exponent": self.theoretical_exponent,
            "status": self.status.value,
            "uniqueness_certified": self.uniqueness_certified,
            "n_paths": self.n_paths,
        }


@dataclass
class TightnessTable:
    """Running time averages (1/t) int_0^t E ||u||_V^p ds."""

    horizons: np.ndarray
    averages: np.ndarray
    stderr: np.ndarray
    burn_in: float = 0.0

    @property
    def spread(self) -> float:
        """max / min of the averages at horizons past burn-in."""
        mask = self.horizons > self.burn_in
        values = self.averages[mask] if np.any(mask) else self.averages
        low = float(np.min(values))
        if low <= 0:
            return 1.0 if float(np.max(values)) <= 0 else float("inf")
        return float(np.max(values)) / low

    def table(self) -> list[dict[str, float]]:
        return [
            {"horizon": float(t), "average_Vp_power": float(a), "stderr": float(s)}
            for t, a, s in zip(self.horizons, self.averages, self.stderr)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {"burn_in": self.burn_in, "spread": self.spread}


@dataclass
class LSReport:
    """Two-sided multiplier bound 0 <= -k <= h^- checked over all paths, steps and nodes."""

    max_violation_lower: float
    max_violation_upper: float
    tol: float
    h_minus_sup: float
    n_paths: int

    @property
    def upper_tol(self) -> float:
        return self.tol * (1.0 + self.h_minus_sup)

    @property
    def passed(self) -> bool:
        return self.max_violation_lower >= -self.tol and self.max_violation_upper <= self.upper_tol

    def table(self) -> list[dict[str, float]]:
        return [
            {
                "max_violation_lower": self.max_violation_lower,
                "max_violation_upper": self.max_violation_upper,
                "tol": self.tol,
                "h_minus_sup": self.h_minus_sup,
            }
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_violation_lower": self.max_violation_lower,
            "max_violation_upper": self.max_violation_upper,
            "tol": self.tol,
            "upper_tol": self.upper_tol,
            "h_minus_sup": self.h_minus_sup,
            "n_paths": self.n_paths,
            "passed": self.passed,
        }


@dataclass
class RateStudy:
    """E sup_t ||u_eps - u_ref||_H^2 against eps, with the log-log slope."""

    epsilons: np.ndarray
    errors: np.ndarray
    stderr: np.ndarray
    fitted_slope: Optional[float]
    theoretical_slope: float
    n_paths: int
    status: FitStatus = FitStatus.FITTED

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.errors) < 0))

    def table(self) -> list[dict[str, float]]:
        return [
            {"epsilon": float(e), "error": float(v), "stderr": float(s)}
            for e, v, s in zip(self.epsilons, self.errors, self.stderr)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "fitted_slope": self.fitted_slope,
            "theoretical_slope": self.theoretical_slope,
            "n_paths": self.n_paths,
            "status": self.status.value,
            "strictly_decreasing": self.strictly_decreasing,
        }


@dataclass
class TimeShiftReport:
    """Statistics of u(t0 + s) versus u(s) restarted from the time-t0 states."""

    functional: str
    t0: float
    shifts: np.ndarray
    shifted: np.ndarray
    restarted: np.ndarray
    stderr: np.ndarray
    n_stderr: float = 3.0

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.shifted - self.restarted) <= self.n_stderr * self.stderr + 1e-12))

    def table(self) -> list[dict[str, float]]:
        return [
            {"s": float(s), "shifted": float(a), "restarted": float(b), "stderr": float(e)}
            for s, a, b, e in zip(self.shifts, self.shifted, self.restarted, self.stderr)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {"functional": self.functional, "t0": self.t0, "passed": self.passed}


@dataclass
class DtRefinementStudy:
    """Cauchy differences E sup_t ||u_dt - u_{dt/2}||_H^2 under dt halving."""

    dts: np.ndarray
    differences: np.ndarray
    n_paths: int

    @property
    def ratios(self) -> np.ndarray:
        """Successive difference ratios; below 1 means the refinement is contracting."""
        if self.differences.size < 2:
            return np.empty(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.differences[1:] / self.differences[:-1]

    def table(self) -> list[dict[str, float]]:
        return [{"dt": float(dt), "cauchy_difference": float(v)} for dt, v in zip(self.dts, self.differences)]

    def to_dict(self) -> dict[str, Any]:
        return {"n_paths": self.n_paths, "ratios": to_jsonable(self.ratios)}


@dataclass
class PenaltyConsistency:
    """Sup distance to the exact-obstacle path and mean complementarity per eps."""

    epsilons: np.ndarray
    sup_errors: np.ndarray
    complementarity: np.ndarray
    max_violation: np.ndarray
    n_paths: int
    slack: float = 0.05

    @property
    def nonincreasing(self) -> bool:
        """Errors never grow by more than the relative slack as eps decreases."""
        return bool(np.all(self.sup_errors[1:] <= (1.0 + self.slack) * self.sup_errors[:-1] + 1e-14))

    def table(self) -> list[dict[str, float]]:
        return [
            {
                "epsilon": float(e),
                "sup_error": float(s),
                "complementarity": float(c),
                "max_violation": float(v),
            }
            for e, s, c, v in zip(self.epsilons, self.sup_errors, self.complementarity, self.max_violation)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {"n_paths": self.n_paths, "nonincreasing": self.nonincreasing, "slack": self.slack}
