from typing import Callable, Iterator

import numpy as np

from src.core.errors import UsageError
from src.utils.calc_utils import pairwise_sum

DEFAULT_CHUNK = 81


class GridQuadrature:
    """
    Uniform periodic grid with `size` points per axis on [0, period)^dim.

    Integrals are normalized to unit volume. The rule is exact for
    trigonometric polynomials whose band is below `size`; `require_band`
    enforces size >= 2 band + 1 for the integrand at hand.
    """

    def __init__(self, dim: int, size: int, period: float = 2.0 * np.pi) -> None:
        if dim < 1 or size < 1:
            raise UsageError(f"Invalid grid dim={dim} size={size}")
        self.dim = dim
        self.size = size
        self.period = period

    def __repr__(self) -> str:
        return f"GridQuadrature(dim={self.dim}, size={self.size})"

    @property
    def count(self) -> int:
        return self.size ** self.dim

    def points(self) -> np.ndarray:
        axis = self.period * np.arange(self.size) / self.size
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def chunks(self, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
        pts = self.points()
        for start in range(0, len(pts), chunk):
            yield pts[start:start + chunk]

    def require_band(self, band: int) -> None:
        if self.size < 2 * band + 1:
            raise UsageError(
                f"Grid size {self.size} cannot resolve integrands of band {band}; need at least {2 * band + 1}"
            )

    def integrate(self, integrand: Callable[[np.ndarray], np.ndarray], chunk: int = DEFAULT_CHUNK) -> np.ndarray:
        """
        Mean of `integrand` over the grid.

        `integrand` maps a (P, dim) block of points to (P, ...) values; the
        result has the trailing shape. Blocks are concatenated before the
        pairwise reduction so the result does not depend on `chunk`.
        """
        values = np.concatenate([np.asarray(integrand(pts)) for pts in self.chunks(chunk)], axis=0)
        if values.ndim == 1:
            return np.asarray(pairwise_sum(values) / self.count)
        flat = values.reshape(values.shape[0], -1)
        return np.array([pairwise_sum(flat[:, j]) for j in range(flat.shape[1])]).reshape(values.shape[1:]) / self.count

    def refined(self, extra: int = 3) -> "GridQuadrature":
        return GridQuadrature(self.dim, self.size + extra, self.period)
