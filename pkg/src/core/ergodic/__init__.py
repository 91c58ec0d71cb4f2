"""Long-time behaviour: reports, the regime classifier, test functionals and fits."""

from src.core.ergodic.base import (
    CouplingFit,
    DtRefinementStudy,
    EquilibriumReport,
    ErgodicAgreement,
    ErgodicEstimate,
    Existence,
    FitStatus,
    LSReport,
    PCase,
    PenaltyConsistency,
    RateStudy,
    RegimeReport,
    TightnessTable,
    TimeShiftReport,
)
from src.core.ergodic.fitting import (
    batch_means_stderr,
    ensemble_mean,
    ensemble_mean_series,
    fit_exponential,
    fit_loglog,
)
from src.core.ergodic.functionals import Functional, FunctionalKind, build_functional, default_bound
from src.core.ergodic.regime import admissible_exponent, classify_regime

__all__ = [
    "CouplingFit",
    "DtRefinementStudy",
    "EquilibriumReport",
    "ErgodicAgreement",
    "ErgodicEstimate",
    "Existence",
    "FitStatus",
    "LSReport",
    "PCase",
    "PenaltyConsistency",
    "RateStudy",
    "RegimeReport",
    "TightnessTable",
    "TimeShiftReport",
    "batch_means_stderr",
    "ensemble_mean",
    "ensemble_mean_series",
    "fit_exponential",
    "fit_loglog",
    "Functional",
    "FunctionalKind",
    "build_functional",
    "default_bound",
    "admissible_exponent",
    "classify_regime",
]
