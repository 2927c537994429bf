from typing import Callable, List

import numpy as np

from src.core.events import CheckResult, merge_worst
from src.grassmann.checks import (
    SUITE,
    check_curvature,
    check_epsilon,
    check_hermitian_killing,
    check_killing_structure,
    check_moment_maps,
)
from src.grassmann.model import GrassmannAlgebraModel, build_model
from src.lie_core import random_su
from src.suites.base import Suite
from src.utils.calc_utils import haar_unitary


def killing_scan(model: GrassmannAlgebraModel, count: int, tol: float, seed: int = 0) -> List[CheckResult]:
    """Pointwise Killing identities over `count` random (A, Haar point) pairs, worst case per identity."""
    rng = np.random.default_rng(seed)
    results: List[CheckResult] = []
    for k in range(count):
        g = haar_unitary(model.N, rng)
        results += check_killing_structure(model, random_su(model.n, seed + k), tol, point=g)
    return merge_worst(results)


class GrassmannSuite(Suite):
    """Pointwise identities of the Grassmannian model, one model per n."""

    name = "grassmann"
    channel = SUITE

    def build(self) -> List[Callable[[], List[CheckResult]]]:
        seed, tol, count = self.config.seed, self.tol, self.config.matrices
        batches = []
        for n in self.config.n:
            model = build_model(n)
            A = random_su(n, seed + 20 + n)
            batches += self.tagged(f"n={n}", [
                self.batch(check_curvature, model, tol.algebra),
                self.batch(killing_scan, model, count, tol.grassmann, seed=seed),
                self.batch(check_hermitian_killing, model, A, tol.grassmann, points=count, seed=seed),
                self.batch(check_moment_maps, model, A, samples=count, tol=tol.grassmann, seed=seed),
                self.batch(check_epsilon, model, tol.grassmann),
            ])
        return batches
