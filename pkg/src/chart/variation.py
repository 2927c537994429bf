from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from src.chart import operators as op
from src.chart.jet import Jet, einsum
from src.chart.metric import Geometry
from src.core.errors import FixtureError, UsageError

FD_STEP = 1e-3


def _scaled(f: Jet, b: Jet) -> Jet:
    return einsum(",ab->ab", f, b)


@dataclass
class Deformation:
    """
    Curve g_t = g + t b1 + (t^2 / 2) b2 of metrics through an Einstein g.

    b1 and b2 are symmetric bilinear jets, so hdot = g^{-1} b1 and
    hddot = g^{-1} b2 and g_t = g(h_t ., .) with h_t = id + t hdot + (t^2/2) hddot.
    All jets live in one space whose t order is at least 2.
    """

    base: Geometry
    b1: Jet
    b2: Jet
    E: float

    def __post_init__(self) -> None:
        t = Jet.parameter(self.base.space, self.base.g.batch)
        half_t2 = einsum(",->", t, t) * 0.5
        self.t = t
        self.metric_t = self.base.g + _scaled(t, self.b1) + _scaled(half_t2, self.b2)
        self.h_t = op.identity(self.base) + _scaled(t, self.hdot) + _scaled(half_t2, self.hddot)

    @cached_property
    def hdot(self) -> Jet:
        return self.base.endomorphism(self.b1)

    @cached_property
    def hddot(self) -> Jet:
        return self.base.endomorphism(self.b2)

    @cached_property
    def curve(self) -> Geometry:
        try:
            return Geometry(self.metric_t)
        except FixtureError as err:
            raise FixtureError(f"g_t lost positive definiteness: {err}") from err

    @cached_property
    def ricci_t(self) -> Jet:
        return self.curve.ricci

    @cached_property
    def ric1(self) -> Jet:
        return self.ricci_t.t_derivative(1)

    @cached_property
    def ric2(self) -> Jet:
        return self.ricci_t.t_derivative(2)

    @cached_property
    def eta_dot(self) -> Jet:
        """Linearized eta at t = 0 with g_h replaced by g."""
        return op.eta_tensor(self.base, self.hdot, self.base.g)

    @cached_property
    def eta_t(self) -> Jet:
        return op.eta_tensor(self.base, self.h_t, self.metric_t)


def deformation(base: Geometry, b1: Jet, b2: Optional[Jet] = None, E: float = 0.0) -> Deformation:
    if base.space.t_order < 2:
        raise UsageError("Deformations need a jet space with t order 2")
    if b2 is None:
        b2 = b1 * 0.0
    return Deformation(base, b1, b2, E)


def first_variation(defo: Deformation) -> Dict[str, Jet]:
    """d/dt Ric^{g_t} at 0 and 1/2 of the modified Einstein operator on hdot."""
    return {
        "ricci_dot": defo.ric1,
        "half_modified_einstein": op.modified_einstein(defo.base, defo.hdot) * 0.5,
    }


def eta_variations(defo: Deformation) -> Dict[str, Jet]:
    """
    eta at first and second order, from the formula and from the connections,
    plus the trace identities they satisfy.
    """
    geo, h = defo.base, defo.hdot
    eta_c = op.eta_from_christoffel(geo, defo.curve)
    eta_dot = defo.eta_dot
    eta_ddot = defo.eta_t.t_derivative(2)
    div_eta = op.divergence_form(geo, eta_dot)
    # d(delta h) as the skew endomorphism X -> (d alpha)(X, .)^#
    d_delta = einsum("ay,xy->ax", geo.ginv, op.exterior_form(geo.lower(op.divergence(geo, h))))
    return {
        "eta_dot": eta_dot,
        "eta_dot_linearized": defo.eta_t.t_derivative(1),
        "eta_dot_connection": eta_c.t_derivative(1),
        "eta_ddot": eta_ddot,
        "eta_ddot_connection": eta_c.t_derivative(2),
        "trace_dot": geo.frame_trace(eta_dot, "ij,ija->a"),
        "trace_dot_expected": -op.bianchi(geo, h),
        "trace_ddot": geo.frame_trace(eta_ddot, "ij,ija->a"),
        "trace_ddot_expected": -op.bianchi(geo, defo.hddot) + op.apply(h, op.bianchi(geo, h)) * 2.0,
        "divergence": div_eta,
        "divergence_expected": op.rough_laplacian(geo, h) + d_delta,
    }


def curvature_at(base: Geometry, b1: Jet, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Curvature of g_h, h = id + t hdot, directly and through eta.

    Works in the t-free space of `base`; returns both values.
    """
    metric_h = base.g + b1 * t
    direct = Geometry(metric_h).curvature
    h = op.identity(base) + base.endomorphism(b1) * t
    via_eta = op.curvature_from_eta(base, op.eta_tensor(base, h, metric_h))
    return direct.value(), via_eta.value()


def ricci_along(base: Geometry, b1: Jet, b2: Jet, t: float) -> np.ndarray:
    return Geometry(base.g + b1 * t + b2 * (0.5 * t * t)).ricci.value()


def finite_difference_derivatives(base: Geometry, b1: Jet, b2: Jet, step: float = FD_STEP) -> Tuple[np.ndarray, np.ndarray]:
    """Five-point first and second t-derivatives of Ric^{g_t} at 0."""
    f = {k: ricci_along(base, b1, b2, k * step) for k in (-2, -1, 0, 1, 2)}
    first = (-f[2] + 8.0 * f[1] - 8.0 * f[-1] + f[-2]) / (12.0 * step)
    second = (-f[2] + 16.0 * f[1] - 30.0 * f[0] + 16.0 * f[-1] - f[-2]) / (12.0 * step * step)
    return first, second


def skew_part_identity(defo: Deformation) -> Tuple[Jet, Jet]:
    """g^{-1} d^2/dt^2 (ric - E g_t) against d^2 Ric + 2 hdot o d Ric."""
    ric_form = einsum("ac,cb->ab", defo.metric_t, defo.ricci_t) - defo.metric_t * defo.E
    lhs = defo.base.endomorphism(ric_form.t_derivative(2))
    rhs = defo.ric2 + op.compose(defo.hdot, defo.ric1) * 2.0
    return lhs, rhs


def second_variation_terms(defo: Deformation, H: Jet) -> Dict[str, Jet]:
    """
    Pointwise scalars whose integrals give both sides of the second
    variation formula paired with H, the bracket part in weak form.
    """
    geo, h, E = defo.base, defo.hdot, defo.E
    h2 = op.compose(h, h)
    grad_tr = op.gradient(geo, op.trace(h))
    dh = op.covariant(geo, h)
    mod_h = op.modified_einstein(geo, h)
    sym = (
        op.modified_einstein(geo, defo.hddot - h2 * 1.5)
        - h2 * E
        - op.delta_star(geo, op.trace(h2).grad()) * 0.5
        + op.delta_star_vector(geo, op.apply(h, grad_tr)) * 2.0
        - op.directional(dh, grad_tr)
        - op.anticommutator(h, mod_h + op.delta_star(geo, op.trace(h).grad())) * 0.5
    )
    return {
        "lhs": op.endo_inner(geo, defo.ric2 * 2.0, H),
        "pointwise": op.endo_inner(geo, sym, H),
        "v_hh_H": op.endo_inner(geo, op.divergence_form(geo, op.fn_bracket(geo, h, h)), H),
        "v_hH_h": op.endo_inner(geo, op.divergence_form(geo, op.fn_bracket(geo, h, H)), h),
        "v_Hh_h": op.endo_inner(geo, op.divergence_form(geo, op.fn_bracket(geo, H, h)), h),
    }


def quadratic_terms(geo: Geometry, h: Jet, eta_dot: Jet, H: Jet) -> Dict[str, Jet]:
    """Contractions of eta-dot and nabla h against a symmetric H."""
    dh = op.covariant(geo, h)
    L = geo.frame_trace(einsum("iab,jbc->ijac", dh, dh), "ij,ijac->ac")
    d_h = op.d_nabla(geo, h)
    mixed = einsum("iya,jyk->ijak", eta_dot, dh)
    mixed = einsum("ijak,al->ijkl", mixed, geo.bilinear(H))
    mixed = geo.frame_trace(mixed, "ik,ijkl->jl")
    square = geo.frame_trace(einsum("ima,jym->ijay", eta_dot, eta_dot), "ij,ijay->ay")
    return {
        "L": L,
        "L_H": op.endo_inner(geo, L, H),
        "dh_Hsharp_dh": op.form_inner(geo, d_h, op.sharp(H, d_h)),
        "eta_dh_H": einsum("jl,jl->", geo.ginv, mixed),
        "eta_square_H": op.endo_inner(geo, square, H),
    }


def vector_A(geo: Geometry, h: Jet, eta_dot: Jet) -> Tuple[Jet, Jet]:
    """A = sum_i eta-dot_{e_i} h e_i, directly and as -2 delta h^2 - 1/2 grad tr h^2 + 2 h delta h."""
    direct = geo.frame_trace(einsum("iya,yk->ika", eta_dot, h), "ik,ika->a")
    h2 = op.compose(h, h)
    formula = (
        op.divergence(geo, h2) * -2.0
        - op.gradient(geo, op.trace(h2)) * 0.5
        + op.apply(h, op.divergence(geo, h)) * 2.0
    )
    return direct, formula


def second_variation_pointwise(defo: Deformation, H: Jet) -> Tuple[Jet, Jet]:
    """
    g(d^2 Ric, H) and its assembly from the modified Einstein operator, the
    bracket divergence, the vector A and the quadratic eta terms.
    """
    geo, h = defo.base, defo.hdot
    h2 = op.compose(h, h)
    dh = op.covariant(geo, h)
    A, _ = vector_A(geo, h, defo.eta_dot)
    quad = quadratic_terms(geo, h, defo.eta_dot, H)
    main = (
        op.modified_einstein(geo, defo.hddot) * 0.5
        - op.einstein_operator(geo, h2)
        + op.divergence_form(geo, op.fn_bracket(geo, h, h))
        - op.delta_star_vector(geo, A - op.apply(h, op.bianchi(geo, h)))
        - op.directional(dh, op.gradient(geo, op.trace(h))) * 0.5
    )
    rhs = op.endo_inner(geo, main, H) - quad["eta_square_H"] * 0.5 + quad["eta_dh_H"]
    return op.endo_inner(geo, defo.ric2, H), rhs
