"""Q-Wiener increments and the multiplicative noise coefficient."""

from src.core.noise.base import NoiseIncrement, NoiseKind, NoiseSpec
from src.core.noise.diffusion import (
    LipschitzCheck,
    apply_G,
    empirical_lipschitz,
    hilbert_schmidt_sq,
    sine_basis,
)
from src.core.noise.streams import IncrementSource, increment_stream, sample_increment

__all__ = [
    "NoiseIncrement",
    "NoiseKind",
    "NoiseSpec",
    "LipschitzCheck",
    "apply_G",
    "empirical_lipschitz",
    "hilbert_schmidt_sq",
    "sine_basis",
    "IncrementSource",
    "increment_stream",
    "sample_increment",
]
