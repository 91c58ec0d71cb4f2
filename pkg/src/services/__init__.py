"""Service layer: experiment orchestration over trajectory ensembles."""

from src.services.certification_service import CertificationService
from src.services.ensemble_service import EnsembleService
from src.services.ergodic_service import ErgodicService
from src.services.penalization_service import PenalizationService

__all__ = [
    "CertificationService",
    "EnsembleService",
    "ErgodicService",
    "PenalizationService",
]
