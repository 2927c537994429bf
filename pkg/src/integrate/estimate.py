from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.core.errors import SampleError, UsageError
from src.integrate.sampler import HaarSampler
from src.utils.calc_utils import pairwise_sum

# integrand: (sample index, Haar point) -> scalar or 1-d array
Integrand = Callable[[int, np.ndarray], object]


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: Optional[int] = None

    def zscore(self, target: float = 0.0, floor: float = 0.0) -> float:
        """|mean - target| in standard errors; `floor` bounds the error below for integrands that are zero up to rounding."""
        diff = abs(self.mean - target)
        err = max(self.stderr, floor)
        if err > 0:
            return diff / err
        # exact integrands, e.g. constants
        return 0.0 if diff <= 1e-12 * max(1.0, abs(target)) else float("inf")

    def scaled(self, c: float) -> "MCEstimate":
        return MCEstimate(c * self.mean, abs(c) * self.stderr, self.n_samples, self.seed)

    def as_detail(self) -> dict:
        return {"estimate": self.mean, "stderr": self.stderr, "n_samples": self.n_samples, "seed": self.seed}


def _evaluate(f: Integrand, sampler: HaarSampler, start: int, stop: int) -> np.ndarray:
    rows = []
    for i in range(start, stop):
        val = np.atleast_1d(np.asarray(f(i, sampler.unitary(i)), dtype=float))
        if not np.all(np.isfinite(val)):
            raise SampleError(i)
        rows.append(val)
    return np.stack(rows)


def sample_values(
    f: Integrand, sampler: HaarSampler, n_samples: int, jobs: int = 1, chunk: int = 256
) -> np.ndarray:
    """
    Integrand values at Haar points 0..n_samples-1, shape (n_samples, k).

    Chunks are dispatched to a thread pool and reassembled in index order,
    so the array is identical for every `jobs`.
    """
    if n_samples < 2:
        raise UsageError(f"Monte-Carlo needs at least 2 samples, got {n_samples}")
    bounds = [(s, min(s + chunk, n_samples)) for s in range(0, n_samples, chunk)]
    if jobs <= 1 or len(bounds) == 1:
        return np.concatenate([_evaluate(f, sampler, a, b) for a, b in bounds])
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(lambda ab: _evaluate(f, sampler, *ab), bounds))
    return np.concatenate(parts)


def estimate(values: np.ndarray, seed: Optional[int] = None) -> MCEstimate:
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = pairwise_sum(values) / n
    var = pairwise_sum((values - mean) ** 2) / (n - 1)
    return MCEstimate(mean=mean, stderr=float(np.sqrt(var / n)), n_samples=n, seed=seed)


def estimate_columns(values: np.ndarray, seed: Optional[int] = None):
    return [estimate(values[:, k], seed) for k in range(values.shape[1])]


def mc_integral(f: Integrand, sampler: HaarSampler, n_samples: int, jobs: int = 1) -> MCEstimate:
    values = sample_values(f, sampler, n_samples, jobs)
    if values.shape[1] != 1:
        raise UsageError("mc_integral expects a scalar integrand; use sample_values for vectors")
    return estimate(values[:, 0], sampler.master_seed)
