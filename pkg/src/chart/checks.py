from dataclasses import replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.chart import operators as op
from src.chart.fields import TrigField, divergence_free, flat_divergence, random_field
from src.chart.fixtures import VALIDATION_POINTS, FubiniStudy, check_kaehler
from src.chart.jet import Jet, einsum
from src.chart.metric import ChartMetric, Geometry, curvature_suite
from src.chart.quadrature import DEFAULT_CHUNK, GridQuadrature
from src.chart.variation import (
    curvature_at, deformation, eta_variations, finite_difference_derivatives, first_variation,
    quadratic_terms, second_variation_pointwise, second_variation_terms, skew_part_identity, vector_A,
)
from src.core.errors import UsageError
from src.core.events import CheckResult, precondition_failure, residual_result
from src.utils.calc_utils import max_abs, rel_residual
from src.utils.misc_utils import time_s

SUITE = "chart"

POINTWISE_ORDER = 3
WEAK_ORDER = 2
FIELD_BAND = 1
CURVE_PARAMETER = 0.1


def _residual(lhs, rhs, floor: float = 1.0) -> float:
    return rel_residual(lhs, rhs, floor)


def _weak_residual(lhs: float, parts: Sequence[float]) -> float:
    scale = max([abs(lhs)] + [abs(p) for p in parts] + [1e-300])
    return abs(lhs - sum(parts)) / scale


def _timed(results: List[CheckResult], t0: float) -> List[CheckResult]:
    wall = (time_s() - t0) / max(len(results), 1)
    return [replace(r, wall_time=wall) for r in results]


def _seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def _field(kind: str, geo: Geometry, points: np.ndarray, seed: int, scale: float = 1.0) -> Jet:
    return random_field(kind, geo.dim, FIELD_BAND, seed, scale).jet(geo.space, points)


def _symmetric(geo: Geometry, points: np.ndarray, seed: int, scale: float = 1.0) -> Jet:
    return geo.endomorphism(_field("symmetric", geo, points, seed, scale))


def _times_identity(geo: Geometry, f: Jet) -> Jet:
    return einsum(",ab->ab", f, op.identity(geo))


def _require_torus(metric: ChartMetric, quad: GridQuadrature) -> None:
    if metric.domain.kind != "torus":
        raise UsageError(f"{metric.name}: integrated identities need a torus fixture")
    if quad.dim != metric.dim or not np.isclose(quad.period, metric.domain.extent):
        raise UsageError(f"{quad} does not cover the {metric.name} chart")


def _integrate(metric: ChartMetric, quad: GridQuadrature, band: int,
               terms: Callable[[Geometry, np.ndarray], Sequence[Jet]], t_order: int = 0) -> np.ndarray:
    """Integrals of the scalar jets returned by `terms`, one per entry."""
    _require_torus(metric, quad)
    quad.require_band(band)

    def integrand(pts: np.ndarray) -> np.ndarray:
        geo = metric.geometry(pts, WEAK_ORDER, t_order)
        return np.stack([j.value() for j in terms(geo, pts)], axis=1)

    return quad.integrate(integrand, DEFAULT_CHUNK)


def check_curvature(metric: ChartMetric, tol: float, seed: int = 0,
                    points: int = VALIDATION_POINTS) -> List[CheckResult]:
    t0 = time_s()
    data = curvature_suite(metric, metric.sample_points(points, seed))
    out = []
    E = metric.einstein
    if E is None:
        ratios = data.einstein_ratio()
        E = float(np.mean(ratios))
        out.append(residual_result(SUITE, f"{metric.name}_einstein_constant", "scal / n constant across the chart",
                                   max_abs(ratios - E) / max(1.0, abs(E)), tol, samples=points, detail={"E": E}))
    out.append(residual_result(SUITE, f"{metric.name}_einstein", "Ric = E g",
                               data.einstein_residual(E) / max(1.0, abs(E)), tol, samples=points, detail={"E": E}))
    if metric.einstein == 0.0:
        out.append(residual_result(SUITE, f"{metric.name}_flat", "R = 0", max_abs(data.curvature), tol, samples=points))
    if isinstance(metric, FubiniStudy):
        expected = 2.0 * (metric.k + 1)
        out.append(residual_result(SUITE, f"{metric.name}_einstein_value", "E = 2(k + 1) for the potential log(1 + |z|^2)",
                                   abs(E - expected) / expected, tol, detail={"E": E, "expected": expected}))
    return _timed(out, t0)


def check_operator_identities(metric: ChartMetric, tol: float, seed: int = 0,
                              points: int = VALIDATION_POINTS) -> List[CheckResult]:
    """Self-tests of the operator suite on random fields."""
    t0 = time_s()
    s = _seeds(seed, 4)
    pts = metric.sample_points(points, s[0])
    geo = metric.geometry(pts, WEAK_ORDER)
    h = _symmetric(geo, pts, s[1])
    H = _symmetric(geo, pts, s[2])
    alpha = _field("form", geo, pts, s[3])

    ds = op.delta_star(geo, alpha)
    lie = geo.endomorphism(op.lie_derivative_metric(geo, geo.raise_(alpha))) * 0.5
    trace_ds = op.trace(ds)
    codiff = op.codifferential_density(geo, alpha)
    dh = op.d_nabla(geo, h)
    with_id = op.fn_bracket(geo, op.identity(geo), h)
    bracket = op.fn_bracket(geo, h, h)
    dH = op.d_nabla(geo, H)
    sharp_l = op.form_inner(geo, op.sharp(h, dh), dH)
    sharp_r = op.form_inner(geo, dh, op.sharp(h, dH))

    out = [
        residual_result(SUITE, "trace_delta_star", "tr(delta* alpha) = -d* alpha",
                        _residual(trace_ds.value(), -codiff.value()), tol, samples=points),
        residual_result(SUITE, "delta_star_lie", "delta* alpha = 1/2 g^-1 L_(alpha#) g",
                        _residual(ds.value(), lie.value()), tol, samples=points),
        residual_result(SUITE, "bracket_identity", "[id, h] = 0",
                        _residual(with_id.value(), 0.0, max(1.0, max_abs(dh.value()))), tol, samples=points),
        residual_result(SUITE, "bracket_connection", "[h, h] = -(nabla_hX h)Y + (nabla_hY h)X + h d h(X, Y)",
                        _residual(bracket.value(), op.fn_bracket_connection(geo, h).value()), tol, samples=points),
        residual_result(SUITE, "bracket_sharp", "[h, h] = -h # d h + d h^2",
                        _residual(bracket.value(), op.fn_bracket_sharp(geo, h).value()), tol, samples=points),
        residual_result(SUITE, "bracket_symmetric", "[h, H] = [H, h]",
                        _residual(op.fn_bracket(geo, h, H).value(), op.fn_bracket(geo, H, h).value()),
                        tol, samples=points),
        residual_result(SUITE, "sharp_symmetric", "<h # a, b> = <a, h # b>",
                        _residual(sharp_l.value(), sharp_r.value()), tol, samples=points),
    ]
    return _timed(out, t0)


def weitzenboeck_check(metric: ChartMetric, E: float, tol: float, seed: int = 0,
                       points: int = VALIDATION_POINTS) -> List[CheckResult]:
    t0 = time_s()
    s = _seeds(seed, 3)
    pts = metric.sample_points(points, s[0])
    geo = metric.geometry(pts, WEAK_ORDER)
    h = _symmetric(geo, pts, s[1])
    alpha = _field("form", geo, pts, s[2])

    lhs0 = op.divergence_form(geo, op.d_nabla(geo, h)) + op.vector_derivative(geo, op.divergence(geo, h))
    rhs0 = op.rough_laplacian(geo, h) + h * E - op.curvature_action(geo, h)

    lhs2 = geo.lower(op.divergence(geo, op.delta_star(geo, alpha))) * 2.0 - op.codifferential(geo, alpha).grad()
    rhs2 = op.hodge_laplacian(geo, alpha) - alpha * (2.0 * E)

    out = [
        residual_result(SUITE, f"{metric.name}_weitzenboeck_2tensor",
                        "delta d h + d delta h = nabla* nabla h + E h - R h",
                        _residual(lhs0.value(), rhs0.value()), tol, samples=points),
        residual_result(SUITE, f"{metric.name}_weitzenboeck_1form",
                        "2 delta delta* a - d d* a = Delta a - 2E a",
                        _residual(lhs2.value(), rhs2.value()), tol, samples=points),
    ]
    return _timed(out, t0)


def variation_first(metric: ChartMetric, E: float, tol: float, seed: int = 0,
                    points: int = VALIDATION_POINTS, scale: float = 0.5) -> List[CheckResult]:
    """
    First variation of Ric along g_t = g + t b + (t^2/2) b2, the perturbed
    connection tensor and its traces, and the two special directions.
    """
    t0 = time_s()
    s = _seeds(seed, 4)
    pts = metric.sample_points(points, s[0])
    geo = metric.geometry(pts, POINTWISE_ORDER, t_order=2)
    b1 = _field("symmetric", geo, pts, s[1], scale)
    b2 = _field("symmetric", geo, pts, s[2], scale)
    defo = deformation(geo, b1, b2, E)

    first = first_variation(defo)
    eta = eta_variations(defo)

    def pair(name: str, ref: str, lhs: Jet, rhs: Jet) -> CheckResult:
        return residual_result(SUITE, f"{metric.name}_{name}", ref, _residual(lhs.value(), rhs.value()),
                               tol, samples=points)

    out = [
        pair("first_variation", "d/dt Ric = 1/2 modified Einstein operator on hdot",
             first["ricci_dot"], first["half_modified_einstein"]),
        pair("eta_linearization", "eta-dot from the linear formula = d/dt eta_t",
             eta["eta_dot"], eta["eta_dot_linearized"]),
        pair("eta_connection", "eta-dot = 2 d/dt (Gamma_t - Gamma)", eta["eta_dot"], eta["eta_dot_connection"]),
        pair("eta_connection_second", "eta-ddot = 2 d^2/dt^2 (Gamma_t - Gamma)",
             eta["eta_ddot"], eta["eta_ddot_connection"]),
        pair("trace_eta_dot", "eta-dot_ei ei = -D hdot", eta["trace_dot"], eta["trace_dot_expected"]),
        pair("trace_eta_ddot", "eta-ddot_ei ei = -D hddot + 2 hdot D hdot",
             eta["trace_ddot"], eta["trace_ddot_expected"]),
        pair("divergence_eta_dot", "delta eta-dot = nabla* nabla hdot + d delta hdot",
             eta["divergence"], eta["divergence_expected"]),
    ]

    plain = metric.geometry(pts, WEAK_ORDER)
    direct, via_eta = curvature_at(plain, _field("symmetric", plain, pts, s[1], scale), CURVE_PARAMETER)
    out.append(residual_result(SUITE, f"{metric.name}_curvature_composition",
                               "R^h = R - 1/2 (nabla eta) - 1/4 [eta, eta] at t = 0.1",
                               _residual(direct, via_eta), tol, samples=points))

    X = _field("vector", geo, pts, s[3], scale)
    gauge_dir = op.delta_star_vector(geo, X)
    gauge = deformation(geo, geo.bilinear(gauge_dir), E=E)
    floor = max(1.0, max_abs(gauge_dir.value()))
    out.append(residual_result(SUITE, f"{metric.name}_gauge_first_variation", "d/dt Ric = 0 for hdot = delta* X",
                               _residual(gauge.ric1.value(), 0.0, floor), tol, samples=points))
    out.append(residual_result(SUITE, f"{metric.name}_gauge_kernel", "modified Einstein operator on delta* X = 0",
                               _residual(op.modified_einstein(geo, gauge_dir).value(), 0.0, floor), tol,
                               samples=points))

    lam = 0.3
    conformal = deformation(geo, geo.g * lam, E=E)
    expected = op.identity(geo).value() * (-E * lam)
    out.append(residual_result(SUITE, f"{metric.name}_conformal_first_variation",
                               "d/dt Ric = -E lambda id for hdot = lambda id",
                               _residual(conformal.ric1.value(), expected), tol, samples=points))
    out.append(residual_result(SUITE, f"{metric.name}_conformal_kernel",
                               "modified Einstein operator on lambda id = -2 E lambda id",
                               _residual(op.modified_einstein(geo, op.identity(geo) * lam).value(), 2.0 * expected),
                               tol, samples=points))
    return _timed(out, t0)


def jet_fd_crosscheck(metric: ChartMetric, tol: float, seed: int = 0, points: int = VALIDATION_POINTS,
                      scale: float = 0.5) -> List[CheckResult]:
    """t-derivatives of Ric from jets against five-point finite differences."""
    t0 = time_s()
    s = _seeds(seed, 3)
    pts = metric.sample_points(points, s[0])
    geo = metric.geometry(pts, WEAK_ORDER, t_order=2)
    b1 = _field("symmetric", geo, pts, s[1], scale)
    b2 = _field("symmetric", geo, pts, s[2], scale)
    defo = deformation(geo, b1, b2, metric.einstein or 0.0)
    first, second = finite_difference_derivatives(geo, b1, b2)
    out = [
        residual_result(SUITE, f"{metric.name}_jet_first_derivative", "jet d/dt Ric = five-point difference",
                        _residual(defo.ric1.value(), first), tol, samples=points),
        residual_result(SUITE, f"{metric.name}_jet_second_derivative", "jet d^2/dt^2 Ric = five-point difference",
                        _residual(defo.ric2.value(), second), tol, samples=points),
    ]
    return _timed(out, t0)


def second_variation_sides(metric: ChartMetric, E: float, quad: GridQuadrature,
                           b1: TrigField, b2: TrigField, H: TrigField) -> np.ndarray:
    """
    Integrals of 2 g(d^2 Ric, H), of the pointwise part of the symmetric
    second variation paired with H, and of the three bracket pairings.
    """
    band = max(2 * b1.band + H.band, b2.band + H.band, 1)

    def terms(geo: Geometry, pts: np.ndarray) -> List[Jet]:
        defo = deformation(geo, b1.jet(geo.space, pts), b2.jet(geo.space, pts), E)
        t = second_variation_terms(defo, geo.endomorphism(H.jet(geo.space, pts)))
        return [t["lhs"], t["pointwise"], t["v_hh_H"], t["v_hH_h"], t["v_Hh_h"]]

    return _integrate(metric, quad, band, terms, t_order=2)


def variation_second(metric: ChartMetric, E: float, quad: GridQuadrature, tol: float, seed: int = 0,
                     triples: int = 5, scale: float = 0.5) -> List[CheckResult]:
    """
    Symmetric part of the second variation of Ric paired with random H over
    the torus, the bracket operator entering only through its weak form.
    """
    t0 = time_s()
    worst, sides = 0.0, []
    for k, s in enumerate(_seeds(seed, triples)):
        ss = _seeds(s, 3)
        b1, b2, H = (random_field("symmetric", metric.dim, FIELD_BAND, x, scale) for x in ss)
        tot = second_variation_sides(metric, E, quad, b1, b2, H)
        worst = max(worst, _weak_residual(tot[0], tot[1:]))
        sides.append([float(v) for v in tot])

    s = _seeds(seed + 1, 3)
    pts = metric.sample_points(VALIDATION_POINTS, s[0])
    geo = metric.geometry(pts, WEAK_ORDER, t_order=2)
    defo = deformation(geo, _field("symmetric", geo, pts, s[1], scale), _field("symmetric", geo, pts, s[2], scale), E)
    skew_l, skew_r = skew_part_identity(defo)

    b1 = random_field("symmetric", metric.dim, FIELD_BAND, s[1], scale)
    ident = _constant_identity(b1)
    with_id = second_variation_sides(metric, E, quad, b1, b1.scaled(0.0), ident)

    out = [
        residual_result(SUITE, "second_variation_weak", "2 <d^2 Ric, H> = <symmetric second variation, H>",
                        worst, tol, samples=triples, detail={"sides": sides, "grid": quad.size}),
        residual_result(SUITE, "second_variation_skew_part",
                        "g^-1 d^2/dt^2 (ric - E g_t) = d^2 Ric + 2 hdot d/dt Ric",
                        _residual(skew_l.value(), skew_r.value()), tol, samples=VALIDATION_POINTS),
        residual_result(SUITE, "bracket_weak_identity", "<delta [h, id], h> + <delta [id, h], h> = 0",
                        abs(with_id[3] + with_id[4]) / max(abs(with_id[2]), abs(with_id[0]), 1.0), tol),
    ]
    return _timed(out, t0)


def _constant_identity(like: TrigField) -> TrigField:
    coeffs = np.zeros_like(like.coeffs)
    zero = int(np.flatnonzero(~np.any(like.wavevectors, axis=1))[0])
    coeffs[zero] = np.eye(like.dim)
    return TrigField("symmetric", like.wavevectors, coeffs)


def pointwise_identities(metric: ChartMetric, E: float, tol: float, seed: int = 0,
                         points: int = VALIDATION_POINTS, scale: float = 0.5) -> List[CheckResult]:
    t0 = time_s()
    s = _seeds(seed, 6)
    pts = metric.sample_points(points, s[0])
    geo = metric.geometry(pts, POINTWISE_ORDER, t_order=2)
    b1 = _field("symmetric", geo, pts, s[1], scale)
    defo = deformation(geo, b1, _field("symmetric", geo, pts, s[2], scale), E)
    h, H = defo.hdot, _symmetric(geo, pts, s[3])
    eta = defo.eta_dot
    dh = op.covariant(geo, h)

    # directional identity, one component per coordinate direction X = d_x
    left = einsum("cx,cab->xab", h, dh) + einsum("ab,xyb->xay", h, eta)
    right = -op.fn_bracket(geo, h, h).linear("xya->xay") + op.covariant(geo, op.compose(h, h))
    quad = quadratic_terms(geo, h, eta, H)
    A_direct, A_formula = vector_A(geo, h, eta)
    ric_H, assembled = second_variation_pointwise(defo, H)

    mod_h = op.modified_einstein(geo, h)
    X = _field("vector", geo, pts, s[4])
    f = _field("scalar", geo, pts, s[5])
    n = geo.dim
    eq1_l = geo.lower(op.bianchi(geo, op.delta_star_vector(geo, X) + _times_identity(geo, f)))
    eq1_r = op.hodge_laplacian(geo, geo.lower(X)) - geo.lower(X) * (2.0 * E) + f.grad() * float(n - 2)
    eq2_l = op.modified_einstein(geo, _times_identity(geo, f))
    eq2_r = _times_identity(geo, op.scalar_laplacian(geo, f) - f * (2.0 * E)) - op.delta_star(geo, f.grad()) * float(n - 2)

    combo_l = quad["eta_dh_H"] - quad["eta_square_H"] * 0.5
    combo_r = (quad["L_H"] - quad["dh_Hsharp_dh"]) * 0.5

    def pair(name: str, ref: str, lhs, rhs, floor: float = 1.0) -> CheckResult:
        return residual_result(SUITE, f"{metric.name}_{name}", ref,
                               _residual(np.asarray(lhs), np.asarray(rhs), floor), tol, samples=points)

    out = [
        pair("directional_bracket", "g(nabla_hX h + h eta_X, H) = g(-X _| [h, h] + nabla_X h^2, H)",
             op.endo_inner_batched(geo, left, H).value(), op.endo_inner_batched(geo, right, H).value()),
        pair("quadratic_mixed", "g(eta_ei (nabla_ej h) ei, H ej) = -<d h, H # d h> + g(L, H)",
             quad["eta_dh_H"].value(), (quad["L_H"] - quad["dh_Hsharp_dh"]).value()),
        pair("quadratic_square", "g(eta_ei^2, H) = g(L, H) - <d h, H # d h>",
             quad["eta_square_H"].value(), (quad["L_H"] - quad["dh_Hsharp_dh"]).value()),
        pair("quadratic_combination", "-1/2 g(eta^2, H) + g(eta (nabla h), H) = 1/2 (g(L, H) - <d h, H # d h>)",
             combo_l.value(), combo_r.value()),
        pair("vector_A", "eta_ei h ei = -2 delta h^2 - 1/2 d tr h^2 + 2 h delta h",
             A_direct.value(), A_formula.value()),
        pair("second_variation_pointwise", "g(d^2 Ric, H) assembled from eta, A and the bracket divergence",
             ric_H.value(), assembled.value()),
        pair("bianchi_modified_einstein", "D o modified Einstein operator = 0",
             op.bianchi(geo, mod_h).value(), 0.0, max(1.0, max_abs(mod_h.value()))),
        pair("bianchi_gauge", "D(delta* X + f id) = (Delta - 2E) X + (n - 2) df", eq1_l.value(), eq1_r.value()),
        pair("modified_einstein_conformal", "modified Einstein (f id) = (Delta f - 2E f) id - (n - 2) delta* df",
             eq2_l.value(), eq2_r.value()),
    ]
    return _timed(out, t0)


def integrated_identities(metric: ChartMetric, E: float, quad: GridQuadrature, tol: float, seed: int = 0,
                          scale: float = 0.5) -> List[CheckResult]:
    """Integration-by-parts identities for the bracket over the torus."""
    t0 = time_s()
    s = _seeds(seed, 2)
    hf = random_field("symmetric", metric.dim, FIELD_BAND, s[0], scale)
    Hf = random_field("symmetric", metric.dim, FIELD_BAND, s[1], scale)

    def terms(geo: Geometry, pts: np.ndarray) -> List[Jet]:
        h = geo.endomorphism(hf.jet(geo.space, pts))
        H = geo.endomorphism(Hf.jet(geo.space, pts))
        eta = op.eta_tensor(geo, h, geo.g)
        quad_terms = quadratic_terms(geo, h, eta, H)
        h2 = op.compose(h, h)
        dh, dH = op.d_nabla(geo, h), op.d_nabla(geo, H)
        hh, hH, Hh = op.fn_bracket(geo, h, h), op.fn_bracket(geo, h, H), op.fn_bracket(geo, H, h)
        div = op.divergence_form
        mod_h2 = op.modified_einstein(geo, h2) + op.delta_star(geo, op.trace(h2).grad())
        mod_h = op.modified_einstein(geo, h) + op.delta_star(geo, op.trace(h).grad())
        rest = mod_h2 * 0.5 - op.anticommutator(h, mod_h) * 0.5 - h2 * E
        return [
            # bracket integration, both sides
            quad_terms["L_H"] - quad_terms["dh_Hsharp_dh"],
            -op.endo_inner(geo, div(geo, hh), H),
            op.endo_inner(geo, div(geo, hH), h) * 2.0,
            op.endo_inner(geo, rest, H),
            # weak bracket operator and its rewritings
            op.endo_inner(geo, div(geo, hh), H) + op.endo_inner(geo, div(geo, hH), h)
            + op.endo_inner(geo, div(geo, Hh), h),
            op.form_inner(geo, hh, dH) + op.form_inner(geo, hH, dh) * 2.0,
            -op.form_inner(geo, op.sharp(h, dh), dH) * 2.0 + op.form_inner(geo, op.d_nabla(geo, h2), dH)
            - op.form_inner(geo, dh, op.sharp(H, dh))
            + op.form_inner(geo, op.d_nabla(geo, op.anticommutator(h, H)), dh),
            -op.form_inner(geo, dh, op.sharp(h, dH)) * 2.0 - op.form_inner(geo, dh, op.sharp(H, dh))
            + op.endo_inner(geo, h2, div(geo, dH))
            + op.endo_inner(geo, op.anticommutator(h, div(geo, dh)), H),
        ]

    tot = _integrate(metric, quad, 3 * FIELD_BAND, terms)
    chain = tot[4:]
    scale_chain = max(max_abs(chain), 1e-300)
    out = [
        residual_result(SUITE, "bracket_integration", "<L, H> - <d h, H # d h> = -<delta[h,h], H> + 2<delta[h,H], h> + <S, H>",
                        _weak_residual(tot[0], tot[1:4]), tol, detail={"sides": tot[:4].tolist()}),
        residual_result(SUITE, "weak_bracket_chain", "<v(h,h), H> through three integrated rewritings",
                        max_abs(chain - chain[0]) / scale_chain, tol, detail={"values": chain.tolist()}),
    ]
    return _timed(out, t0)


def identity_checks(metric: ChartMetric, E: float, tol: float, seed: int = 0,
                    quad: Optional[GridQuadrature] = None) -> List[CheckResult]:
    out = pointwise_identities(metric, E, tol, seed)
    if quad is not None and metric.domain.kind == "torus":
        out += integrated_identities(metric, E, quad, tol, seed)
    return out


def divergence_free_fields(dim: int, count: int, seed: int, scale: float = 0.5) -> List[TrigField]:
    return [divergence_free(random_field("symmetric", dim, FIELD_BAND, s, scale)) for s in _seeds(seed, count)]


def koiso_sides(metric: ChartMetric, E: float, quad: GridQuadrature, field: TrigField) -> np.ndarray:
    """Integrals of 2P(h), <delta[h,h], h>, <Delta_E h, h^2> and tr h^3."""

    def terms(geo: Geometry, pts: np.ndarray) -> List[Jet]:
        h = geo.endomorphism(field.jet(geo.space, pts))
        h2 = op.compose(h, h)
        second = geo.nabla(op.covariant(geo, h), "dud")
        along_h = geo.frame_trace(einsum("icab,ck->ikab", second, h), "ik,ikab->ab")
        mixed = einsum("ijab,bk->ijak", second, h)
        mixed = einsum("ijak,al->ijkl", mixed, geo.bilinear(h))
        mixed = einsum("jl,jl->", geo.ginv, geo.frame_trace(mixed, "ik,ijkl->jl"))
        cube = op.trace(op.compose(h, h2))
        two_p = op.endo_inner(geo, along_h, h) * 3.0 - mixed * 6.0 + cube * (2.0 * E)
        return [
            two_p,
            op.endo_inner(geo, op.divergence_form(geo, op.fn_bracket(geo, h, h)), h),
            op.endo_inner(geo, op.einstein_operator(geo, h), h2),
            cube,
        ]

    return _integrate(metric, quad, 3 * field.band, terms)


def koiso_check(metric: ChartMetric, E: float, fields: Sequence[TrigField], quad: GridQuadrature,
                tol: float) -> List[CheckResult]:
    """
    2 int P(h) = 3 <delta[h,h], h> - 3/2 <Delta_E h, h^2> - E int tr h^3
    for divergence-free h.
    """
    t0 = time_s()
    name, ref = "koiso_obstruction", "2 int P(h) = 3<delta[h,h], h> - 3/2 <Delta_E h, h^2> - E int tr h^3"
    probe = quad.points()[:: max(1, quad.count // 64)]
    worst, sides = 0.0, []
    for k, field in enumerate(fields):
        div = max_abs(flat_divergence(field, probe))
        if div > tol * max(1.0, max_abs(field.coeffs)):
            return _timed([precondition_failure(SUITE, name, ref, f"field {k} has delta h = {div:.3e}", div)], t0)
        tot = koiso_sides(metric, E, quad, field)
        parts = [3.0 * tot[1], -1.5 * tot[2], -E * tot[3]]
        worst = max(worst, _weak_residual(tot[0], parts))
        sides.append([float(tot[0])] + [float(p) for p in parts])
    out = [residual_result(SUITE, name, ref, worst, tol, samples=len(fields), detail={"sides": sides})]
    return _timed(out, t0)


def _type_projection(J: np.ndarray, B: np.ndarray, sign: float) -> np.ndarray:
    """(B - sign J B J) / 2: sign +1 keeps the J-commuting part, -1 the anti-commuting one."""
    JBJ = np.einsum("ab,pbc,cd->pad", J, B, J)
    return 0.5 * (B - sign * JBJ)


def kahler_type_check(metric: FubiniStudy, tol: float, seed: int = 0,
                      points: int = VALIDATION_POINTS) -> List[CheckResult]:
    """The curvature action keeps J-commuting and J-anticommuting tensors apart."""
    if not isinstance(metric, FubiniStudy):
        raise UsageError(f"{metric.name} carries no complex structure")
    t0 = time_s()
    s = _seeds(seed, 2)
    pts = metric.sample_points(points, s[0])
    nabla_J = check_kaehler(metric, pts)
    geo = metric.geometry(pts, WEAK_ORDER)
    J = metric.complex_structure
    k = _symmetric(geo, pts, s[1])
    JkJ = k.with_constant(J, "ab,bc->ac").with_constant(J, "cd,ac->ad")
    out = []
    for label, sign in (("plus", 1.0), ("minus", -1.0)):
        h = (k - JkJ * sign) * 0.5
        Rh = op.curvature_action(geo, h).value()
        leak = _type_projection(J, Rh, -sign)
        out.append(residual_result(SUITE, f"{metric.name}_curvature_type_{label}",
                                   "R preserves S^2,+ and S^2,-", _residual(leak, 0.0, max_abs(Rh)), tol,
                                   samples=points, detail={"nabla_J": nabla_J}))
    Rid = op.curvature_action(geo, op.identity(geo)).value()
    out.append(residual_result(SUITE, f"{metric.name}_curvature_identity", "R id = Ric stays J-commuting",
                               _residual(_type_projection(J, Rid, -1.0), 0.0, max_abs(Rid)), tol, samples=points))
    return _timed(out, t0)


def quadrature_refinement(metric: ChartMetric, quad: GridQuadrature, tol: float, seed: int = 0) -> List[CheckResult]:
    """Integrals of a band-limited cubic integrand on the grid and on a finer one."""
    t0 = time_s()
    _require_torus(metric, quad)
    field = random_field("symmetric", metric.dim, FIELD_BAND, seed)
    quad.require_band(3 * field.band)

    def cubic(pts: np.ndarray) -> np.ndarray:
        h = field.values(pts)
        return np.einsum("pab,pbc,pca->p", h, h, h)

    coarse = quad.integrate(cubic)
    fine = quad.refined().integrate(cubic)
    out = [residual_result(SUITE, "quadrature_refinement", "grid integral unchanged above the band limit",
                           abs(float(coarse) - float(fine)) / max(abs(float(fine)), 1.0), tol,
                           detail={"grid": quad.size})]
    return _timed(out, t0)
