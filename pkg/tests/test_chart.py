import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.chart import operators as op
from src.chart.checks import (
    check_curvature, check_operator_identities, divergence_free_fields, identity_checks, jet_fd_crosscheck,
    kahler_type_check, koiso_check, koiso_sides, quadrature_refinement, second_variation_sides, variation_first,
    variation_second, weitzenboeck_check,
)
from src.chart.fields import TrigField, constant_field, divergence_free, flat_divergence, random_field
from src.chart.fixtures import FubiniStudy, fixture, validate_einstein
from src.chart.jet import Jet, einsum, jet_space
from src.chart.metric import Geometry
from src.chart.quadrature import GridQuadrature
from src.chart.variation import deformation
from src.core.errors import FixtureError, UsageError
from src.core.events import Status

POINTWISE_TOL = 1e-7
FIRST_VARIATION_TOL = 1e-8
WEAK_TOL = 1e-6


def all_pass(results):
    bad = [(r.name, r.residual) for r in results if r.status is not Status.PASS]
    assert not bad, bad


def test_jet_polynomial_derivatives():
    space = jet_space(2, 3)
    x = Jet.coordinates(space, np.array([[0.5, 0.2]]))
    f = einsum(",->", einsum(",->", x[0], x[0]), x[1])  # x^2 y
    assert f.value()[0] == pytest.approx(0.05)
    assert f.d(0).value()[0] == pytest.approx(0.2)
    assert f.d(0).d(0).value()[0] == pytest.approx(0.4)
    assert f.d(0).d(1).value()[0] == pytest.approx(1.0)
    assert f.d(0).d(0).d(1).value()[0] == pytest.approx(2.0)


def test_jet_power_matches_closed_form():
    space = jet_space(2, 2)
    p = np.array([[0.5, 0.2], [-1.0, 0.3]])
    x = Jet.coordinates(space, p)
    r2 = (p ** 2).sum(axis=1)
    f = (einsum("a,a->", x, x) + 1.0).power(-2.0)
    np.testing.assert_allclose(f.value(), (1 + r2) ** -2.0)
    np.testing.assert_allclose(f.grad().value(), -4.0 * p * ((1 + r2) ** -3.0)[:, None])


def test_jet_power_rejects_nonpositive_base():
    space = jet_space(1, 1)
    x = Jet.coordinates(space, np.array([[-1.0]]))
    with pytest.raises(UsageError):
        x[0].power(0.5)


def test_jet_inverse_is_exact_to_order(chart_metrics):
    geo = chart_metrics["sphere3"].geometry(np.array([[0.3, -0.2, 0.4]]), order=3)
    product = einsum("ab,bc->ac", geo.g, geo.ginv)
    expected = Jet.constant(geo.space, np.eye(3)[None])
    np.testing.assert_allclose(product.coeffs, expected.coeffs, atol=1e-12)


def test_jet_parameter_derivatives():
    space = jet_space(1, 1, t_order=2)
    t = Jet.parameter(space, 1)
    f = (t + 1.0).power(-1.0)
    assert f.t_derivative(1).value()[0] == pytest.approx(-1.0)
    assert f.t_derivative(2).value()[0] == pytest.approx(2.0)


def test_jet_value_after_too_many_derivatives():
    x = Jet.coordinates(jet_space(1, 1), np.array([[0.0]]))
    with pytest.raises(UsageError):
        x.d(0).d(0).value()


def test_field_json_keeps_coefficients():
    field = random_field("symmetric", 3, 1, seed=4)
    back = TrigField.from_json(field.to_json())
    pts = np.random.default_rng(0).uniform(0, 2 * np.pi, (5, 3))
    np.testing.assert_allclose(back.values(pts), field.values(pts), atol=1e-14)
    assert back.band == 1


def test_field_json_rejects_out_of_band_terms():
    raw = b'{"kind":"scalar","dim":1,"band":1,"terms":[[[2],[1.0],[0.0]]]}'
    with pytest.raises(UsageError):
        TrigField.from_json(raw)


def test_field_unknown_kind():
    with pytest.raises(UsageError):
        random_field("spinor", 3, 1, seed=0)


def test_field_jet_matches_values(chart_metrics):
    field = random_field("symmetric", 3, 1, seed=2)
    pts = np.random.default_rng(1).uniform(0, 2 * np.pi, (4, 3))
    jet = field.jet(jet_space(3, 2), pts)
    np.testing.assert_allclose(jet.value(), field.values(pts), atol=1e-13)
    step = 1e-5
    shifted = field.values(pts + np.array([step, 0, 0])) - field.values(pts - np.array([step, 0, 0]))
    np.testing.assert_allclose(jet.d(0).value(), shifted / (2 * step), atol=1e-8)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_divergence_free_projection(seed):
    field = divergence_free(random_field("symmetric", 3, 1, seed))
    pts = np.random.default_rng(seed).uniform(0, 2 * np.pi, (10, 3))
    assert np.max(np.abs(flat_divergence(field, pts))) < 1e-13
    values = field.values(pts)
    np.testing.assert_allclose(values, np.swapaxes(values, 1, 2), atol=1e-14)


def test_quadrature_rejects_unresolved_band():
    with pytest.raises(UsageError):
        GridQuadrature(3, 6).require_band(3)


def test_quadrature_integrates_trig_polynomial():
    quad = GridQuadrature(2, 5)
    value = quad.integrate(lambda p: np.cos(p[:, 0]) ** 2 + np.sin(p[:, 1]), chunk=7)
    assert float(value) == pytest.approx(0.5, abs=1e-14)


def test_quadrature_refinement(chart_metrics, torus_grid):
    all_pass(quadrature_refinement(chart_metrics["torus3"], torus_grid, 1e-12, seed=3))


def test_unknown_fixture():
    with pytest.raises(UsageError):
        fixture("sphere7")


def test_degenerate_metric_rejected():
    space = jet_space(2, 1)
    with pytest.raises(FixtureError):
        Geometry(Jet.constant(space, np.zeros((1, 2, 2))))


@pytest.mark.parametrize("name, E", [("torus3", 0.0), ("sphere3", 2.0), ("cp2", 6.0)])
def test_einstein_constants(chart_metrics, name, E):
    assert validate_einstein(chart_metrics[name]) == pytest.approx(E, abs=1e-9)


@pytest.mark.parametrize("name", ["torus3", "sphere3", "cp2"])
def test_curvature_fixtures(chart_metrics, name):
    all_pass(check_curvature(chart_metrics[name], 1e-9, seed=5))


@pytest.mark.parametrize("name", ["torus3", "sphere3"])
def test_operator_identities(chart_metrics, name):
    all_pass(check_operator_identities(chart_metrics[name], POINTWISE_TOL, seed=11))


@pytest.mark.parametrize("name", ["torus3", "sphere3"])
def test_weitzenboeck(chart_metrics, name):
    metric = chart_metrics[name]
    all_pass(weitzenboeck_check(metric, metric.einstein, POINTWISE_TOL, seed=2))


@pytest.mark.parametrize("name", ["torus3", "sphere3"])
def test_variation_first(chart_metrics, name):
    metric = chart_metrics[name]
    all_pass(variation_first(metric, metric.einstein, FIRST_VARIATION_TOL, seed=9))


@pytest.mark.parametrize("name", ["torus3", "sphere3"])
def test_jet_fd_crosscheck(chart_metrics, name):
    all_pass(jet_fd_crosscheck(chart_metrics[name], 1e-6, seed=1))


def test_deformation_needs_second_order_parameter(chart_metrics):
    geo = chart_metrics["torus3"].geometry(np.zeros((1, 3)), order=2, t_order=1)
    with pytest.raises(UsageError):
        deformation(geo, geo.g)


@pytest.mark.parametrize("name", ["torus3", "sphere3"])
def test_pointwise_identities(chart_metrics, name):
    metric = chart_metrics[name]
    all_pass(identity_checks(metric, metric.einstein, POINTWISE_TOL, seed=6))


def test_integrated_identities(chart_metrics, torus_grid):
    metric = chart_metrics["torus3"]
    results = identity_checks(metric, 0.0, WEAK_TOL, seed=8, quad=torus_grid)
    assert {"bracket_integration", "weak_bracket_chain"} <= {r.name for r in results}
    all_pass(results)


def test_second_variation(chart_metrics, torus_grid):
    all_pass(variation_second(chart_metrics["torus3"], 0.0, torus_grid, WEAK_TOL, seed=12, triples=1))


@pytest.mark.slow
def test_second_variation_acceptance(chart_metrics, torus_grid):
    all_pass(variation_second(chart_metrics["torus3"], 0.0, torus_grid, WEAK_TOL, seed=0, triples=5))


def test_second_variation_without_first_order_term(chart_metrics, torus_grid):
    metric = chart_metrics["torus3"]
    b2 = random_field("symmetric", 3, 1, seed=21, scale=0.5)
    H = random_field("symmetric", 3, 1, seed=22, scale=0.5)
    tot = second_variation_sides(metric, 0.0, torus_grid, b2.scaled(0.0), b2, H)
    np.testing.assert_allclose(tot[2:], 0.0, atol=1e-14)
    assert tot[0] == pytest.approx(tot[1], rel=1e-9, abs=1e-14)


def test_second_variation_requires_torus(chart_metrics, torus_grid):
    f = random_field("symmetric", 3, 1, seed=1)
    with pytest.raises(UsageError):
        second_variation_sides(chart_metrics["sphere3"], 2.0, torus_grid, f, f, f)


def test_second_variation_requires_resolved_band(chart_metrics):
    f = random_field("symmetric", 3, 1, seed=1)
    with pytest.raises(UsageError):
        second_variation_sides(chart_metrics["torus3"], 0.0, GridQuadrature(3, 5), f, f, f)


def test_koiso(chart_metrics, torus_grid):
    fields = divergence_free_fields(3, 2, seed=3)
    all_pass(koiso_check(chart_metrics["torus3"], 0.0, fields, torus_grid, WEAK_TOL))


@pytest.mark.slow
def test_koiso_acceptance(chart_metrics, torus_grid):
    fields = divergence_free_fields(3, 5, seed=0)
    all_pass(koiso_check(chart_metrics["torus3"], 0.0, fields, torus_grid, WEAK_TOL))


def test_koiso_parallel_field_vanishes(chart_metrics, torus_grid):
    h = constant_field("symmetric", 3, np.diag([1.0, -0.5, -0.5]))
    tot = koiso_sides(chart_metrics["torus3"], 0.0, torus_grid, h)
    np.testing.assert_allclose(tot[:3], 0.0, atol=1e-14)


def test_koiso_precondition(chart_metrics, torus_grid):
    field = random_field("symmetric", 3, 1, seed=5)
    results = koiso_check(chart_metrics["torus3"], 0.0, [field], torus_grid, WEAK_TOL)
    assert len(results) == 1
    assert results[0].status is Status.FAIL
    assert "precondition" in results[0].detail


def test_kahler_type(chart_metrics):
    all_pass(kahler_type_check(chart_metrics["cp2"], 1e-8, seed=4))


def test_kahler_type_needs_complex_structure(chart_metrics):
    with pytest.raises(UsageError):
        kahler_type_check(chart_metrics["sphere3"], 1e-8)


def test_fubini_study_parallel_complex_structure():
    metric = FubiniStudy(2)
    geo = metric.geometry(metric.sample_points(5, 0), order=1)
    J = Jet.constant(geo.space, np.broadcast_to(metric.complex_structure, (5, 4, 4)))
    assert np.max(np.abs(geo.nabla(J, "ud").value())) < 1e-12
    # J is g-orthogonal
    g = geo.g.value()
    np.testing.assert_allclose(np.einsum("ba,pbc,cd->pad", metric.complex_structure, g, metric.complex_structure), g,
                               atol=1e-13)


def test_bracket_with_identity_vanishes(chart_metrics):
    metric = chart_metrics["sphere3"]
    pts = metric.sample_points(5, 1)
    geo = metric.geometry(pts, order=2)
    h = geo.endomorphism(random_field("symmetric", 3, 1, seed=3).jet(geo.space, pts))
    assert np.max(np.abs(op.fn_bracket(geo, op.identity(geo), h).value())) < 1e-12
