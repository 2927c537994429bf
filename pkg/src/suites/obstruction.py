from typing import Callable, List

from src.core.events import CheckResult, merge_worst, residual_result, zscore_result
from src.grassmann.model import GrassmannAlgebraModel, build_model
from src.integrate.sampler import HaarSampler
from src.lie_core import hyperquadric_sample, random_su
from src.obstruct import (
    SUITE,
    Verdict,
    check_alg_identity,
    classify,
    obstruction_closed_form,
    obstruction_direct,
    proportionality_c,
    rigidity_scan,
)
from src.suites.base import Suite
from src.utils.misc_utils import time_s


def closed_form_scan(
    model: GrassmannAlgebraModel,
    count: int,
    sampler: HaarSampler,
    n_samples: int,
    tol: float,
    accept: float,
    reject: float,
    seed: int = 0,
    jobs: int = 1,
) -> List[CheckResult]:
    """Direct and closed-form obstruction with its summand identities, on `count` random directions."""
    results: List[CheckResult] = []
    for k in range(count):
        out, _, _ = obstruction_closed_form(
            model, random_su(model.n, seed + k), sampler.with_seed(sampler.master_seed + k), n_samples,
            accept=accept, reject=reject, tol=tol, jobs=jobs,
        )
        results += out
    return merge_worst(results)


def hyperquadric_unobstructed(
    model: GrassmannAlgebraModel,
    count: int,
    sampler: HaarSampler,
    n_samples: int,
    accept: float,
    reject: float,
    seed: int = 0,
    jobs: int = 1,
) -> List[CheckResult]:
    """On hyperquadric directions the obstruction integral vanishes and classify finds them integrable."""
    t0 = time_s()
    zs, verdicts = [], []
    for k in range(count):
        A = hyperquadric_sample(model.n, seed + k)
        zs.append(obstruction_direct(model, A, sampler, n_samples, jobs).zscore(0.0))
        verdicts.append(classify(model, A, sampler, n_samples, accept=accept, reject=reject,
                                 with_polynomial=False, jobs=jobs).verdict)
    wall = (time_s() - t0) / 2
    misclassified = sum(1 for v in verdicts if v is not Verdict.INTEGRABLE)
    return [
        zscore_result(SUITE, "hyperquadric_obstruction_vanishes", "P(X_A) = 0 for A in the hyperquadric",
                      max(zs), accept, reject, n_samples * count, detail={"zscores": zs}),
        residual_result(SUITE, "hyperquadric_integrable", "hyperquadric directions integrable to second order",
                        float(misclassified), 0.5, samples=count, wall_time=wall,
                        detail={"verdicts": [v.value for v in verdicts]}),
    ]


class ObstructionSuite(Suite):
    """Second-order obstruction: pipelines, proportionality to P0 and the rigidity scan."""

    name = "obstruction"
    channel = SUITE

    def build(self) -> List[Callable[[], List[CheckResult]]]:
        cfg, tol = self.config, self.tol
        mc = dict(accept=tol.zscore_accept, reject=tol.zscore_reject, jobs=cfg.jobs)
        batches = []
        for n in cfg.n:
            model = build_model(n)
            sampler = HaarSampler(model.N, cfg.seed)
            per_n = [
                self.batch(check_alg_identity, model, tol.grassmann, seed=cfg.seed),
                self.batch(closed_form_scan, model, cfg.matrices, sampler, cfg.mc_samples, tol.grassmann,
                           seed=cfg.seed, **mc),
                self.batch(_first, proportionality_c, model, cfg.matrices, sampler.with_seed(cfg.seed + 1),
                           cfg.mc_samples, seed=cfg.seed + 100, **mc),
                self.batch(rigidity_scan, model, cfg.rigidity_count, sampler.with_seed(cfg.seed + 2), cfg.mc_samples,
                           seed=cfg.seed + 1000, **mc),
            ]
            if n % 2 == 0:
                per_n.append(self.batch(hyperquadric_unobstructed, model, 2, sampler.with_seed(cfg.seed + 3),
                                        cfg.mc_samples, seed=cfg.seed, **mc))
            batches += self.tagged(f"n={n}", per_n)
        return batches


def _first(fn, *args, **kwargs) -> List[CheckResult]:
    return fn(*args, **kwargs)[0]
