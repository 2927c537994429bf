from typing import Callable, List

from src.core.events import CheckResult
from src.grassmann.model import build_model
from src.integrate.checks import SUITE, check_integral_identities, check_invariance
from src.integrate.sampler import HaarSampler
from src.lie_core import random_su
from src.suites.base import Suite


class IntegralsSuite(Suite):
    """Monte-Carlo integral identities over the Grassmannian, judged by z-scores."""

    name = "integrals"
    channel = SUITE

    def build(self) -> List[Callable[[], List[CheckResult]]]:
        cfg, tol = self.config, self.tol
        mc = dict(accept=tol.zscore_accept, reject=tol.zscore_reject, jobs=cfg.jobs)
        batches = []
        for n in cfg.n:
            model = build_model(n)
            sampler = HaarSampler(model.N, cfg.seed)
            A, B, W, C = (random_su(n, cfg.seed + 40 + k) for k in range(4))
            batches += self.tagged(f"n={n}", [
                self.batch(check_integral_identities, model, A, B, sampler, cfg.mc_samples, tol=tol.grassmann, **mc),
                self.batch(check_invariance, model, A, B, W, C, sampler.with_seed(cfg.seed + 1), cfg.mc_samples, **mc),
            ])
        return batches
