"""
Natural operators on a chart, all evaluated as jets.

Symmetric 2-tensors are carried as g-symmetric endomorphisms h[a, b] = h^a_b.
Vector-valued 2-forms are arrays alpha[i, j, a] = alpha(d_i, d_j)^a, and the
inner product on them is 1/2 sum_ij g(alpha(e_i, e_j), beta(e_i, e_j)).
Divergences are delta = -sum_i e_i _| nabla_{e_i}; vector fields stand in for
1-forms wherever the metric identifies them.
"""
from typing import Dict

import numpy as np

from src.chart.jet import Jet, einsum
from src.chart.metric import Geometry


def identity(geo: Geometry) -> Jet:
    return Jet.constant(geo.space, np.broadcast_to(np.eye(geo.dim), (geo.g.batch, geo.dim, geo.dim)))


def trace(h: Jet) -> Jet:
    return h.linear("aa->")


def compose(a: Jet, b: Jet) -> Jet:
    return einsum("ab,bc->ac", a, b)


def anticommutator(a: Jet, b: Jet) -> Jet:
    return compose(a, b) + compose(b, a)


def apply(h: Jet, vector: Jet) -> Jet:
    return einsum("ab,b->a", h, vector)


def gradient(geo: Geometry, f: Jet) -> Jet:
    return geo.raise_(f.grad())


def covariant(geo: Geometry, h: Jet) -> Jet:
    """(nabla h)[i, a, b] = (nabla_{d_i} h)^a_b."""
    return geo.nabla(h, "ud")


def vector_derivative(geo: Geometry, vector: Jet) -> Jet:
    """nabla V as the endomorphism X -> nabla_X V."""
    return geo.nabla(vector, "u").linear("ba->ab")


def d_nabla(geo: Geometry, h: Jet) -> Jet:
    """(d h)(X, Y) = (nabla_X h) Y - (nabla_Y h) X."""
    dh = covariant(geo, h)
    return dh.linear("iaj->ija") - dh.linear("jai->ija")


def divergence(geo: Geometry, h: Jet) -> Jet:
    """delta h = -sum_i (nabla_{e_i} h) e_i, a vector field."""
    return -geo.frame_trace(covariant(geo, h), "ij,iaj->a")


def divergence_form(geo: Geometry, alpha: Jet) -> Jet:
    """(delta alpha)(X) = -sum_i (nabla_{e_i} alpha)(e_i, X), an endomorphism."""
    dalpha = geo.nabla(alpha, "ddu")
    return -geo.frame_trace(dalpha, "ij,ijxa->ax")


def delta_star(geo: Geometry, form: Jet) -> Jet:
    """Symmetric part of nabla on a 1-form, returned as an endomorphism."""
    da = geo.nabla(form, "d")
    sym = (da + da.linear("ij->ji")) * 0.5
    return geo.endomorphism(sym)


def delta_star_vector(geo: Geometry, vector: Jet) -> Jet:
    return delta_star(geo, geo.lower(vector))


def bianchi(geo: Geometry, h: Jet) -> Jet:
    """2 delta h + grad tr h."""
    return divergence(geo, h) * 2.0 + gradient(geo, trace(h))


def curvature_action(geo: Geometry, h: Jet) -> Jet:
    """(R h) X = sum_i R(e_i, X) h e_i."""
    partial = einsum("cbfa,fe->cbae", geo.curvature, h)
    return geo.frame_trace(partial, "ce,cbae->ab")


def rough_laplacian(geo: Geometry, h: Jet) -> Jet:
    """nabla^* nabla h = -sum_i nabla^2_{e_i, e_i} h."""
    second = geo.nabla(covariant(geo, h), "dud")
    return -geo.frame_trace(second, "ij,ijab->ab")


def einstein_operator(geo: Geometry, h: Jet) -> Jet:
    """Delta_E = nabla^* nabla - 2 R acting on symmetric endomorphisms."""
    return rough_laplacian(geo, h) - curvature_action(geo, h) * 2.0


def modified_einstein(geo: Geometry, h: Jet) -> Jet:
    """Delta_E - delta^* o (2 delta + d tr)."""
    return einstein_operator(geo, h) - delta_star_vector(geo, bianchi(geo, h))


def sharp(h: Jet, alpha: Jet) -> Jet:
    """(h # alpha)(X, Y) = alpha(hX, Y) + alpha(X, hY)."""
    return einsum("cja,ci->ija", alpha, h) + einsum("ica,cj->ija", alpha, h)


def fn_bracket(geo: Geometry, h1: Jet, h2: Jet) -> Jet:
    """Symmetric bracket 2 [h1, h2] = -(h1 # d h2 + h2 # d h1) + d {h1, h2}."""
    out = -(sharp(h1, d_nabla(geo, h2)) + sharp(h2, d_nabla(geo, h1))) + d_nabla(geo, anticommutator(h1, h2))
    return out * 0.5


def fn_bracket_connection(geo: Geometry, h: Jet) -> Jet:
    """[h, h](X, Y) = -(nabla_{hX} h) Y + (nabla_{hY} h) X + h (d h)(X, Y)."""
    dh = covariant(geo, h)
    return (
        -einsum("ci,caj->ija", h, dh)
        + einsum("cj,cai->ija", h, dh)
        + einsum("ab,ijb->ija", h, d_nabla(geo, h))
    )


def fn_bracket_sharp(geo: Geometry, h: Jet) -> Jet:
    """[h, h] = -h # d h + d h^2."""
    return -sharp(h, d_nabla(geo, h)) + d_nabla(geo, compose(h, h))


def form_inner(geo: Geometry, alpha: Jet, beta: Jet) -> Jet:
    lowered = einsum("ab,klb->kla", geo.g, beta)
    raised = einsum("ik,ija->kja", geo.ginv, alpha)
    raised = einsum("jl,kja->kla", geo.ginv, raised)
    return einsum("kla,kla->", raised, lowered) * 0.5


def endo_inner(geo: Geometry, a: Jet, b: Jet) -> Jet:
    """g(A, B) = sum_i g(A e_i, B e_i)."""
    left = einsum("ac,ab->bc", geo.g, a)
    right = einsum("bc,cd->bd", left, b)
    return einsum("bd,bd->", right, geo.ginv)


def endo_inner_batched(geo: Geometry, a: Jet, b: Jet) -> Jet:
    """g(A_x, B) for a family A[x, :, :]."""
    left = einsum("ac,xab->xbc", geo.g, a)
    right = einsum("xbc,cd->xbd", left, b)
    return einsum("xbd,bd->x", right, geo.ginv)


def directional(dh: Jet, vector: Jet) -> Jet:
    """nabla_V h from the covariant derivative array."""
    return einsum("i,iab->ab", vector, dh)


def exterior_form(form: Jet) -> Jet:
    """d alpha for a 1-form, (d alpha)_ij = d_i alpha_j - d_j alpha_i."""
    grad = form.grad()
    return grad - grad.linear("ij->ji")


def codifferential(geo: Geometry, form: Jet) -> Jet:
    """d^* alpha = -sum_i (nabla_{e_i} alpha)(e_i)."""
    return -geo.frame_trace(geo.nabla(form, "d"), "ij,ij->")


def codifferential_2form(geo: Geometry, beta: Jet) -> Jet:
    return -geo.frame_trace(geo.nabla(beta, "dd"), "ik,ikj->j")


def codifferential_density(geo: Geometry, form: Jet) -> Jet:
    """d^* alpha = -(d_i W^i + W^i d_i log sqrt det g), W = alpha^#, without Christoffel symbols."""
    w = geo.raise_(form)
    log_density = geo.frame_trace(geo.g.grad(), "ij,kij->k") * 0.5
    return -(w.grad().linear("ii->") + einsum("i,i->", w, log_density))


def hodge_laplacian(geo: Geometry, form: Jet) -> Jet:
    """(d d^* + d^* d) on 1-forms."""
    return codifferential(geo, form).grad() + codifferential_2form(geo, exterior_form(form))


def scalar_laplacian(geo: Geometry, f: Jet) -> Jet:
    return codifferential(geo, f.grad())


def lie_derivative_metric(geo: Geometry, vector: Jet) -> Jet:
    """(L_V g)_ij from partial derivatives only."""
    dv = vector.grad()
    return (
        einsum("k,kij->ij", vector, geo.g.grad())
        + einsum("kj,ik->ij", geo.g, dv)
        + einsum("ik,jk->ij", geo.g, dv)
    )


def eta_tensor(geo: Geometry, h: Jet, metric_h: Jet) -> Jet:
    """
    eta[x, y, a] = (eta_X Y)^a with
    g_h(eta_X Y, Z) = g((nabla_X h) Y, Z) + g(X, (nabla_Y h) Z - (nabla_Z h) Y).

    `metric_h` is g_h = g(h., .); passing g itself gives the linearized tensor.
    """
    low = einsum("ca,iab->icb", geo.g, covariant(geo, h))
    rhs = low.linear("xzy->xyz") + low.linear("yxz->xyz") - low.linear("zxy->xyz")
    return einsum("bc,xyc->xyb", metric_h.inverse(), rhs)


def eta_from_christoffel(geo: Geometry, other: Geometry) -> Jet:
    """2 (Gamma^{g_h} - Gamma^g), the same tensor read off the connections."""
    return (other.christoffel - geo.christoffel).linear("kij->ijk") * 2.0


def curvature_from_eta(geo: Geometry, eta: Jet) -> Jet:
    """R^h(X,Y)Z = R(X,Y)Z - 1/2 ((nabla_X eta)_Y Z - (nabla_Y eta)_X Z) - 1/4 [eta_X, eta_Y] Z."""
    deta = geo.nabla(eta, "ddu")
    comm = einsum("bma,cfm->bcfa", eta, eta)
    return (
        geo.curvature
        - (deta - deta.linear("cbfa->bcfa")) * 0.5
        - (comm - comm.linear("cbfa->bcfa")) * 0.25
    )


def operator_suite(geo: Geometry, h: Jet, form: Jet) -> Dict[str, np.ndarray]:
    """Values at the base points of the operators on a symmetric h and a 1-form."""
    return {
        "d_nabla": d_nabla(geo, h).value(),
        "divergence": divergence(geo, h).value(),
        "delta_star": delta_star(geo, form).value(),
        "trace": trace(h).value(),
        "bianchi": bianchi(geo, h).value(),
        "curvature_action": curvature_action(geo, h).value(),
        "einstein": einstein_operator(geo, h).value(),
        "modified_einstein": modified_einstein(geo, h).value(),
        "bracket": fn_bracket(geo, h, h).value(),
        "sharp": sharp(h, d_nabla(geo, h)).value(),
    }
