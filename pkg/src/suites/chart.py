from typing import Callable, List

from src.chart.checks import (
    SUITE,
    check_curvature,
    check_operator_identities,
    divergence_free_fields,
    integrated_identities,
    jet_fd_crosscheck,
    kahler_type_check,
    koiso_check,
    pointwise_identities,
    quadrature_refinement,
    variation_first,
    variation_second,
    weitzenboeck_check,
)
from src.chart.fixtures import FlatTorus, FubiniStudy, fixture, validate_einstein
from src.chart.quadrature import GridQuadrature
from src.core.events import CheckResult
from src.suites.base import Suite


class ChartSuite(Suite):
    """
    Coordinate checks on the Einstein fixtures.

    Integrated checks need the periodic torus chart and the type-preservation
    check needs the complex structure of Fubini-Study.
    """

    name = "chart"
    channel = SUITE

    def build(self) -> List[Callable[[], List[CheckResult]]]:
        cfg, tol = self.config, self.tol
        seed, points = cfg.seed, cfg.points
        batches = []
        for name in cfg.fixtures:
            metric = fixture(name)
            E = metric.einstein if metric.einstein is not None else validate_einstein(metric, seed=seed)
            per_fixture = [self.batch(check_curvature, metric, tol.chart_pointwise, seed=seed, points=points)]

            if isinstance(metric, FubiniStudy):
                per_fixture.append(self.batch(kahler_type_check, metric, tol.chart_pointwise, seed=seed, points=points))
            else:
                per_fixture += [
                    self.batch(check_operator_identities, metric, tol.chart_pointwise, seed=seed, points=points),
                    self.batch(weitzenboeck_check, metric, E, tol.chart_pointwise, seed=seed, points=points),
                    self.batch(variation_first, metric, E, tol.chart_first_variation, seed=seed, points=points),
                    self.batch(jet_fd_crosscheck, metric, tol.chart_weak, seed=seed, points=points),
                    self.batch(pointwise_identities, metric, E, tol.chart_pointwise, seed=seed, points=points),
                ]

            if isinstance(metric, FlatTorus):
                quad = GridQuadrature(metric.dim, cfg.grid)
                fields = divergence_free_fields(metric.dim, cfg.koiso_fields, seed=seed)
                per_fixture += [
                    self.batch(variation_second, metric, E, quad, tol.chart_weak, seed=seed, triples=cfg.triples),
                    self.batch(integrated_identities, metric, E, quad, tol.chart_weak, seed=seed),
                    self.batch(koiso_check, metric, E, fields, quad, tol.chart_weak),
                    self.batch(quadrature_refinement, metric, quad, tol.chart_weak, seed=seed),
                ]
            batches += self.tagged(name, per_fixture)
        return batches
