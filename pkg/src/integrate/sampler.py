from dataclasses import dataclass

import numpy as np

from src.core.errors import UsageError
from src.utils.calc_utils import haar_unitary


@dataclass(frozen=True)
class HaarSampler:
    """
    Counter-based Haar sampler on SU(N).

    Sample i is drawn from its own substream SeedSequence(master_seed, spawn_key=(i,)),
    so any partition of indices across workers reproduces the same points.
    """

    N: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise UsageError(f"Haar sampler needs N >= 2, got {self.N}")
        if self.master_seed < 0:
            raise UsageError(f"Seed must be non-negative, got {self.master_seed}")

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.master_seed, spawn_key=(int(index),)))

    def unitary(self, index: int) -> np.ndarray:
        return haar_unitary(self.N, self.rng(index))

    def with_seed(self, seed: int) -> "HaarSampler":
        return HaarSampler(self.N, seed)
