from dataclasses import replace
from typing import Callable, List

import numpy as np

from src.core.events import CheckResult, lower_bound_result, residual_result
from src.lie_core import (
    SuMatrix,
    bracket,
    cubic_p0,
    hyperquadric_residual,
    hyperquadric_sample,
    p0_zero_locus_residual,
    random_su,
    vanc_odd_check,
)
from src.suites.base import Suite
from src.tensor_alg.checks import (
    SUITE,
    algebra_primitives,
    check_anti_type,
    check_dim3_wedge,
    check_kraines,
    check_quadratic_identities,
    random_j_sym,
)
from src.tensor_alg.hermitian import HermitianModel
from src.utils.misc_utils import time_s

# constructed members are exact up to rounding
CONSTRUCTED_TOL = 1e-12
# a random direction is far from the hyperquadric
GENERIC_DISTANCE = 1e-3


def hyperquadric_checks(n: int, tol: float, seed: int = 0, trials: int = 5) -> List[CheckResult]:
    """
    Membership exactness of constructed hyperquadric elements for even n, the
    emptiness argument for odd n, and the cubic form vanishing on members.
    """
    t0 = time_s()
    out: List[CheckResult] = []
    generic = min(hyperquadric_residual(random_su(n, seed + k)) for k in range(trials))
    out.append(lower_bound_result(SUITE, "hyperquadric_generic", "random A is not in the hyperquadric",
                                  generic, GENERIC_DISTANCE, detail={"n": n, "trials": trials}))
    if n % 2 == 0:
        members = [hyperquadric_sample(n, seed + k) for k in range(trials)]
        out.append(residual_result(
            SUITE, "hyperquadric_members", "A^2 = (tr A^2 / N) id for constructed A",
            max(hyperquadric_residual(A) for A in members), CONSTRUCTED_TOL, samples=trials,
        ))
        out.append(residual_result(
            SUITE, "cubic_zero_locus", "P0(A, A, .) = 0 on the hyperquadric",
            max(p0_zero_locus_residual(A) for A in members), tol, samples=trials,
        ))
    else:
        report = vanc_odd_check(n, trials=trials, seed=seed)
        out.append(residual_result(
            SUITE, "hyperquadric_empty", "hyperquadric = {0} for odd n",
            0.0 if report["passed"] else 1.0, 0.5, samples=trials, detail=report,
        ))
    wall = (time_s() - t0) / len(out)
    return [replace(r, wall_time=wall) for r in out]


def cubic_checks(n: int, tol: float, seed: int = 0, trials: int = 5) -> List[CheckResult]:
    """Slot symmetry, ad-invariance and the diagonal normalization of P0."""
    t0 = time_s()
    rng = np.random.default_rng(seed)
    sym = inv = 0.0
    for k in range(trials):
        A, B, C, W = (random_su(n, int(s)) for s in rng.integers(0, 2**31 - 1, size=4))
        p = cubic_p0(A, B, W)
        scale = max(A.norm() * B.norm() * W.norm(), 1e-300)
        sym = max(sym, abs(p - cubic_p0(B, A, W)) / scale, abs(p - cubic_p0(A, W, B)) / scale)
        cyc = cubic_p0(bracket(C, A), B, W) + cubic_p0(A, bracket(C, B), W) + cubic_p0(A, B, bracket(C, W))
        inv = max(inv, abs(cyc) / (scale * C.norm()))

    a = rng.standard_normal(n + 2)
    a -= a.mean()
    D = SuMatrix(n, np.diag(1j * a))
    diag = abs(cubic_p0(D, D, D) - 2.0 * float(np.sum(a ** 3))) / max(float(np.sum(np.abs(a) ** 3)), 1e-300)
    wall = (time_s() - t0) / 3
    return [
        residual_result(SUITE, "cubic_symmetry", "P0 symmetric in its three slots", sym, tol,
                        samples=trials, wall_time=wall),
        residual_result(SUITE, "cubic_invariance", "P0([C,A],B,W) + P0(A,[C,B],W) + P0(A,B,[C,W]) = 0", inv, tol,
                        samples=trials, wall_time=wall),
        residual_result(SUITE, "cubic_diagonal", "P0(A,A,A) = 2 sum a_j^3 for A = i diag(a)", diag, tol,
                        wall_time=wall),
    ]


def _quadratic(model: HermitianModel, tol: float, seed: int) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    h = random_j_sym(model, rng)
    return check_quadratic_identities(model, h, model.random_vector(rng), tol, h2=model.random_sym(rng, traceless=True))


def _anti(m: int, tol: float, seed: int) -> List[CheckResult]:
    model = HermitianModel.flat(m)
    return check_anti_type(model, model.random_anti(np.random.default_rng(seed)), tol, seed=seed)


class AlgebraSuite(Suite):
    """Exterior algebra on the Hermitian models and the su(n+2) algebra behind the hyperquadric."""

    name = "algebra"
    channel = SUITE

    def build(self) -> List[Callable[[], List[CheckResult]]]:
        seed, tol = self.config.seed, self.tol
        batches = [self.batch(check_dim3_wedge, tol.algebra, seed=seed)]
        for n in self.config.n:
            model = HermitianModel.quaternionic(n)
            batches += self.tagged(f"n={n}", [
                self.batch(algebra_primitives, model, seed, tol.algebra),
                self.batch(check_kraines, model, tol.algebra, seed=seed),
                self.batch(_quadratic, model, tol.algebra, seed + n),
                self.batch(_anti, 2 * n, tol.algebra, seed + n),
                self.batch(cubic_checks, n, tol.algebra, seed=seed),
                self.batch(hyperquadric_checks, n, tol.hyperquadric, seed=seed),
            ])
        return batches
