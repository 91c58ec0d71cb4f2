"""Counter-based random streams.

Every (master_seed, trajectory_id, step_index) triple owns its own Philox stream:
the key packs the seed and trajectory id, the highest counter word holds the step
index, and mode k takes the k-th normal draw of that stream. Draws therefore do
not depend on thread scheduling or on the order trajectories are run in.
"""

import numpy as np

from src.core.exceptions import InvalidDt
from src.core.noise.base import NoiseIncrement, NoiseSpec

_WORD = 64
_MASK = (1 << _WORD) - 1


def increment_stream(master_seed: int, trajectory_id: int, step_index: int) -> np.random.Generator:
    """Generator for one step of one trajectory."""
    key = ((int(trajectory_id) & _MASK) << _WORD) | (int(master_seed) & _MASK)
    counter = (int(step_index) & _MASK) << (3 * _WORD)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def sample_increment(spec: NoiseSpec, dt: float, stream: np.random.Generator) -> NoiseIncrement:
    """Draw the m mode increments, each Normal(0, dt).

    Raises:
        InvalidDt: dt <= 0
    """
    if not dt > 0:
        raise InvalidDt(f"dt must be > 0, got {dt}")
    betas = np.sqrt(dt) * stream.standard_normal(spec.modes)
    return NoiseIncrement(dt=dt, betas=betas)


class IncrementSource:
    """Increments of one trajectory, reproducible from (master_seed, trajectory_id)."""

    def __init__(self, spec: NoiseSpec, master_seed: int, trajectory_id: int):
        self.spec = spec
        self.master_seed = master_seed
        self.trajectory_id = trajectory_id

    def increment(self, step_index: int, dt: float) -> NoiseIncrement:
        stream = increment_stream(self.master_seed, self.trajectory_id, step_index)
        return sample_increment(self.spec, dt, stream)
