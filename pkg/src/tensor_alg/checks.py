from dataclasses import replace
from typing import List, Optional

import numpy as np

from src.core.events import CheckResult, residual_result, precondition_failure, lower_bound_result
from src.tensor_alg.forms import (
    antisymmetrize, compress, derivation, endo_of, form_of, inner, interior, lower_star,
    norm2, wedge, anticommutator,
)
from src.tensor_alg.hermitian import HermitianModel
from src.utils.calc_utils import max_abs, rel_residual
from src.utils.misc_utils import time_s

SUITE = "algebra"


def random_sp_sym(model: HermitianModel, rng: np.random.Generator) -> np.ndarray:
    """Trace-free symmetric endomorphism commuting with J and the triple."""
    h = model.sym_plus(model.sp_part(model.random_sym(rng, traceless=True)))
    return h - np.trace(h) / model.dim * np.eye(model.dim)


def random_j_sym(model: HermitianModel, rng: np.random.Generator) -> np.ndarray:
    """h = F J for a random F in Lambda^{1,1}_0: symmetric, trace-free, commuting with J, tr(hJ) = 0."""
    F = model.random_primitive_11(rng)
    return endo_of(F) @ model.J


def algebra_primitives(model: HermitianModel, seed: int, tol: float, trials: int = 5) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    t0 = time_s()
    d, m = model.dim, model.m
    om = model.omega

    lw = abs(float(lower_star(om, om)) - m) / m

    adj, selfadj = 0.0, 0.0
    for _ in range(trials):
        F = model.random_form2(rng)
        a = rng.standard_normal(d)
        b = antisymmetrize(rng.standard_normal((d, d, d)))
        adj = max(adj, rel_residual(inner(wedge(F, a), b), inner(a, lower_star(F, b))))
        h = model.random_sym(rng)
        c = antisymmetrize(rng.standard_normal((d, d, d)))
        selfadj = max(selfadj, rel_residual(inner(derivation(h, b), c), inner(b, derivation(h, c))))

    out = [
        residual_result(SUITE, "kahler_self_contraction", "L*_w w = m", lw, tol),
        residual_result(SUITE, "lower_star_adjoint", "<L_F a, b> = <a, L*_F b>", adj, tol, samples=trials),
        residual_result(SUITE, "iota_self_adjoint", "<i_h a, b> = <a, i_h b>", selfadj, tol, samples=trials),
    ]

    if model.has_triple:
        csp, proj, compl = 0.0, 0.0, 0.0
        for _ in range(trials):
            h = random_sp_sym(model, rng)
            csp = max(csp, rel_residual(model.C(h), -3.0 * h))
            F = model.random_primitive_11(rng)
            parts = (model.proj_Q(F), model.proj_E(F), model.proj_F(F))
            compl = max(compl, rel_residual(sum(parts), F))
            scale = float(norm2(F))
            cross = [abs(float(inner(parts[i], parts[j]))) / scale for i in range(3) for j in range(i + 1, 3)]
            idem = [
                rel_residual(model.proj_Q(parts[0]), parts[0]),
                rel_residual(model.proj_E(parts[1]), parts[1]),
                rel_residual(model.proj_F(parts[2]), parts[2]),
            ]
            proj = max(proj, *cross, *idem)
        out += [
            residual_result(SUITE, "C_on_sp_type", "C h = -3h for h commuting with the triple", csp, tol,
                            samples=trials),
            residual_result(SUITE, "projector_completeness", "F = F_Q + F_E + F_F on Lambda^{1,1}_0", compl, tol,
                            samples=trials),
            residual_result(SUITE, "projector_orthogonality", "Q, E, F idempotent and orthogonal", proj, tol,
                            samples=trials),
        ]

    wall = (time_s() - t0) / len(out)
    return [replace(r, wall_time=wall) for r in out]


def check_ls(model: HermitianModel, F: np.ndarray, tol: float) -> CheckResult:
    ref = "L*_w(F ^ F) = 2 FJF for primitive F"
    om = model.omega
    prim = max_abs(lower_star(om, F)) / max(max_abs(F), 1.0)
    if prim > tol:
        return precondition_failure(SUITE, "primitive_square", ref, "F is not primitive", prim)
    Fe = endo_of(F)
    lhs = lower_star(om, wedge(F, F))
    rhs = 2.0 * form_of(Fe @ model.J @ Fe)
    return residual_result(SUITE, "primitive_square", ref, rel_residual(lhs, rhs), tol)


def check_kraines(model: HermitianModel, tol: float, seed: int = 0, trials: int = 5) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    m = model.m
    Om, Omt = model.kraines, model.kraines_tilde
    om = model.omega
    w2 = wedge(om, om)
    oms = model.omegas

    out = [
        residual_result(SUITE, "kraines_tilde_primitive", "L*_w Om~ = 0",
                        max_abs(lower_star(om, Omt)) / max_abs(Omt), tol),
        residual_result(SUITE, "kraines_tilde_on_w1", "L*_{w1} Om~ = 2(m^2-4)/3 w1",
                        rel_residual(lower_star(oms[0], Omt), 2.0 * (m * m - 4) / 3.0 * oms[0]), tol),
        residual_result(SUITE, "kraines_on_wa", "L*_{wa} Om = 2(m+1) wa",
                        max(rel_residual(lower_star(w, Om), 2.0 * (m + 1) * w) for w in oms), tol),
        residual_result(SUITE, "kraines_norm", "g(Om, Om) = 6m(m+1)",
                        abs(float(norm2(Om)) - 6 * m * (m + 1)) / (6 * m * (m + 1)), tol,
                        detail={"value": float(norm2(Om)), "expected": 6 * m * (m + 1)}),
    ]

    e = np.eye(model.dim)
    gram = np.array([[inner(interior(e[i], Om), interior(e[j], Om)) for j in range(model.dim)]
                     for i in range(model.dim)])
    out.append(residual_result(SUITE, "kraines_contraction_gram", "g(v _| Om, w _| Om) = 12(m+1) g(v, w)",
                               rel_residual(gram, 12.0 * (m + 1) * e), tol))

    if m >= 3:
        rows = np.stack([compress(interior(e[i], Omt), 3) for i in range(model.dim)])
        smin = float(np.linalg.svd(rows, compute_uv=False).min())
        out.append(lower_bound_result(SUITE, "kraines_tilde_nondegenerate", "v -> v _| Om~ injective", smin, tol))

    r_o, r_ot, r_w2, r_s = 0.0, 0.0, 0.0, 0.0
    for _ in range(trials):
        F = model.random_primitive_11(rng)
        FQ, FE = model.proj_Q(F), model.proj_E(F)
        r_o = max(r_o, rel_residual(0.5 * lower_star(F, Om), F + m * FQ - 4.0 * FE))
        r_ot = max(r_ot, rel_residual(
            0.5 * lower_star(F, Omt),
            (m - 4) / 3.0 * F + m * (m - 1) / 3.0 * FQ - 4.0 * (m - 1) / 3.0 * FE,
        ))
        r_w2 = max(r_w2, rel_residual(0.5 * lower_star(F, w2), -F))
        G = FQ + FE
        r_s = max(r_s, rel_residual(0.5 * lower_star(G, Omt), -m * G + (m - 1) * (m + 4) / 3.0 * model.proj_Q(G)))

    out += [
        residual_result(SUITE, "kraines_on_primitive_11", "1/2 L*_F Om = F + m F_Q - 4 F_E",
                        r_o, tol, samples=trials),
        residual_result(SUITE, "kraines_tilde_on_primitive_11",
                        "1/2 L*_F Om~ = (m-4)/3 F + m(m-1)/3 F_Q - 4(m-1)/3 F_E", r_ot, tol, samples=trials),
        residual_result(SUITE, "omega_square_on_primitive_11", "1/2 L*_F w^2 = -F", r_w2, tol, samples=trials),
        residual_result(SUITE, "kraines_tilde_on_E_plus_Q", "1/2 L*_F Om~ = -m F + (m-1)(m+4)/3 F_Q",
                        r_s, tol, samples=trials),
    ]
    return out


def check_quadratic_identities(
    model: HermitianModel,
    h: np.ndarray,
    v: np.ndarray,
    tol: float,
    h2: Optional[np.ndarray] = None,
    beta: Optional[np.ndarray] = None,
) -> List[CheckResult]:
    """
    Contraction identities of the quaternionic model for one (h, v) pair.

    The two contractions against v _| w^2 need hJ = Jh and tr(hJ) = 0 and are
    reported as precondition failures otherwise. `h2` defaults to `h` and
    `beta` to the Q-part of v ^ hv.
    """
    m, J = model.m, model.J
    scale_h = max(max_abs(h), 1.0)
    sym = max_abs(h - h.T) / scale_h
    tr = abs(float(np.trace(h))) / scale_h
    if sym > tol or tr > tol:
        return [precondition_failure(SUITE, "quadratic_identities", "h in S^2_0",
                                     "h not symmetric trace-free", max(sym, tr))]

    om, Om = model.omega, model.kraines
    vw2 = interior(v, wedge(om, om))
    vOm = interior(v, Om)
    hv = float(v @ h @ v)
    Ch = model.C(h)
    out: List[CheckResult] = []

    ref1 = "g(i_h(v _| w^2), v _| w^2) = 4(m-3) g(hv, v)"
    ref2 = "g(i_h(v _| w^2), v _| Om) = -12 g(v, hv) + 8 g(v, Ch v) + 8m g(hJ, (v ^ Jv)_Q)"
    commutes = max(max_abs(h @ J - J @ h), abs(float(np.trace(h @ J)))) / scale_h
    if commutes > tol:
        out.append(precondition_failure(SUITE, "contraction_w2_w2", ref1, "hJ != Jh", commutes))
        out.append(precondition_failure(SUITE, "contraction_w2_kraines", ref2, "hJ != Jh", commutes))
    else:
        lhs1 = inner(derivation(h, vw2), vw2)
        out.append(residual_result(SUITE, "contraction_w2_w2", ref1,
                                   rel_residual(lhs1, 4.0 * (m - 3) * hv), tol))
        vJv = model.vee(v, J @ v)
        lhs2 = inner(derivation(h, vw2), vOm)
        rhs2 = -12.0 * hv + 8.0 * float(v @ Ch @ v) + 8.0 * m * inner(form_of(h @ J), model.proj_Q(vJv))
        out.append(residual_result(SUITE, "contraction_w2_kraines", ref2, rel_residual(lhs2, rhs2), tol))

    lhs3 = inner(derivation(h, vOm), vOm)
    out.append(residual_result(SUITE, "contraction_kraines_kraines",
                               "g(i_h(v _| Om), v _| Om) = -4 g(v, (3h + (m+4) Ch) v)",
                               rel_residual(lhs3, -4.0 * float(v @ (3.0 * h + (m + 4) * Ch) @ v)), tol))

    a1 = max(
        rel_residual(model.C(anticommutator(h, Ia)), -anticommutator(Ch, Ia) - 2.0 * anticommutator(h, Ia))
        for Ia in model.I
    )
    out.append(residual_result(SUITE, "C_anticommutator", "C{h, Ia} = -{Ch, Ia} - 2{h, Ia}", a1, tol))
    out.append(residual_result(SUITE, "C_quadratic", "C^2 = -2C + 3",
                               rel_residual(model.C(Ch), -2.0 * Ch + 3.0 * h), tol))

    h2 = h if h2 is None else h2
    lhs = inner(derivation(h, Om), derivation(h2, Om))
    rhs = -4.0 * (m + 4) * float(np.sum(Ch * h2)) + 12.0 * m * float(np.sum(h * h2))
    out.append(residual_result(SUITE, "iota_kraines_pairing",
                               "g(i_h1 Om, i_h2 Om) = -4(m+4) g(Ch1, h2) + 12m g(h1, h2)",
                               rel_residual(lhs, rhs), tol))

    if beta is None:
        beta = model.proj_Q(model.vee(v, h @ v))
    sq = lower_star(om, wedge(beta, beta))
    out.append(residual_result(SUITE, "Q_square_contraction", "L*_w(b ^ b) = -(2/m)|b|^2 w for b in Q",
                               rel_residual(sq, -2.0 / m * float(norm2(beta)) * om), tol))
    return out


def _type_square(model: HermitianModel, alpha: np.ndarray) -> np.ndarray:
    # J acting as a derivation is i(p - q) on (p, q)-forms
    return derivation(model.J, derivation(model.J, alpha))


def check_dim3_wedge(tol: float, seed: int = 0, samples: int = 100) -> List[CheckResult]:
    model = HermitianModel.flat(3)
    rng = np.random.default_rng(seed)
    om = model.omega
    ref = "w ^ a = 0 for primitive a of type (2,1)+(1,2), m = 3"

    worst = 0.0
    for _ in range(samples):
        a = antisymmetrize(rng.standard_normal((6, 6, 6)))
        a = (_type_square(model, a) + 9.0 * a) / 8.0
        theta = lower_star(om, a) / (model.m - 1)
        a0 = a - wedge(om, theta)
        worst = max(worst, max_abs(wedge(om, a0)) / max(max_abs(a0), 1e-300))

    a = antisymmetrize(rng.standard_normal((6, 6, 6)))
    a30 = -(_type_square(model, a) + a) / 8.0
    theta = rng.standard_normal(6)
    counter = wedge(theta, om)
    gap = max_abs(wedge(om, counter)) / max_abs(counter)

    return [
        residual_result(SUITE, "dim3_primitive_21", ref, worst, tol, samples=samples),
        residual_result(SUITE, "dim3_type_30", "w ^ a = 0 for a of type (3,0)+(0,3)",
                        max_abs(wedge(om, a30)) / max(max_abs(a30), 1.0), tol),
        lower_bound_result(SUITE, "dim3_non_primitive", "w ^ (theta ^ w) != 0", gap, tol,
                           detail={"expected": "nonzero"}),
    ]


def check_anti_type(model: HermitianModel, h: np.ndarray, tol: float, seed: int = 0) -> List[CheckResult]:
    ref = "hJ = -Jh"
    J = model.J
    scale = max(max_abs(h), 1.0)
    anti = max_abs(h @ J + J @ h) / scale
    if anti > tol:
        return [precondition_failure(SUITE, "anti_type", ref, "hJ != -Jh", anti)]
    rng = np.random.default_rng(seed)
    h2 = h @ h
    gamma = model.proj_11(model.random_form2(rng))
    shifted = derivation(h, gamma)
    return [
        residual_result(SUITE, "anti_trace_cube", "tr h^3 = 0", abs(float(np.trace(h2 @ h))) / scale**3, tol),
        residual_result(SUITE, "anti_square_commutes", "[h^2, J] = 0", max_abs(h2 @ J - J @ h2) / scale**2, tol),
        residual_result(SUITE, "anti_sharp_type_shift", "h # Lambda^{1,1} has no (1,1) part",
                        max_abs(model.proj_11(shifted)) / max(max_abs(shifted), 1e-300), tol),
    ]
