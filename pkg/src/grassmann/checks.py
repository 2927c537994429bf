from dataclasses import replace
from typing import List, Optional

import numpy as np

from src.core.events import CheckResult, residual_result
from src.grassmann.killing import (
    alpha_of, base_matrix, beta_of, codifferential, covariant_derivatives, dx_of, e_of, epsilon_of, epsilon_rank,
    exterior_derivative, gradient, hamiltonian_constant, laplacian, linear_laplacian, p_of,
    phi_of, potential_constant, psi_of, q_of, x_of, z_of,
)
from src.grassmann.model import GrassmannAlgebraModel
from src.lie_core import SuMatrix
from src.tensor_alg.forms import endo_of, inner, interior, lower_star, pullback, wedge
from src.utils.calc_utils import haar_unitary, max_abs
from src.utils.misc_utils import time_s

SUITE = "grassmann"


def _magnitude(model: GrassmannAlgebraModel, B: np.ndarray) -> float:
    return float(np.sqrt(max(model.g(B, B), 0.0))) * max(1.0, model.E)


def _residual(lhs, rhs, floor: float) -> float:
    """max|lhs - rhs| relative to the larger side, or to `floor` when both sides vanish."""
    scale = max(max_abs(lhs), max_abs(rhs), floor, 1e-300)
    return max_abs(np.asarray(lhs) - np.asarray(rhs)) / scale


def _points(model: GrassmannAlgebraModel, count: int, seed: int) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [np.eye(model.N, dtype=complex)] + [haar_unitary(model.N, rng) for _ in range(max(count - 1, 0))]


def _timed(results: List[CheckResult], t0: float) -> List[CheckResult]:
    wall = (time_s() - t0) / max(len(results), 1)
    return [replace(r, wall_time=wall) for r in results]


def check_curvature(model: GrassmannAlgebraModel, tol: float) -> List[CheckResult]:
    t0 = time_s()
    n, m, E = model.n, model.m, model.E
    lQ, lE = model.lambda_Q, model.lambda_E
    res = model.residuals

    eig = np.sort(np.linalg.eigvalsh(model.curvature_matrix()))
    rank = n * n + 3
    expected = np.sort(np.r_[
        np.zeros(len(eig) - rank), lE * np.ones(n * n - 1), lQ * np.ones(3), E,
    ])
    trace_rhs = E / m + 3.0 * lQ / m + (m * m - 4) / (4.0 * m) * lE

    out = [
        residual_result(SUITE, "symmetric_pair", "[k,m] in m, [m,m] in k",
                        max(res["[m,m] in k"], res["[k,m] in m"]), tol),
        residual_result(SUITE, "complex_structure", "J = ad(Z) on m, Ia = ad(Sa) on m",
                        max(res["J = ad(Z)|m"], res["Ia = ad(Sa)|m"]), tol),
        residual_result(SUITE, "einstein", "Ric = E g, E > 0", res["Ric = E g"], tol,
                        detail={"E": E}),
        residual_result(SUITE, "curvature_on_Q", "Lambda_Q / E = m / (m + 4)", res["Lambda_Q / E"], tol,
                        detail={"lambda_Q": lQ}),
        residual_result(SUITE, "curvature_on_E", "Lambda_E / E = 4 / (m + 4)", res["Lambda_E / E"], tol,
                        detail={"lambda_E": lE}),
        residual_result(SUITE, "curvature_spectrum", "spectrum of R = {E, Lambda_Q^3, Lambda_E^(n^2-1), 0}",
                        max_abs(eig - expected) / E, tol),
        residual_result(SUITE, "curvature_trace", "E = E/m + 3 Lambda_Q/m + (m^2-4) Lambda_E/(4m)",
                        abs(trace_rhs - E) / E, tol),
    ]
    return _timed(out, t0)


def check_killing_structure(
    model: GrassmannAlgebraModel, A: SuMatrix, tol: float, point: Optional[np.ndarray] = None
) -> List[CheckResult]:
    """
    Pointwise identities for the Killing field X_A, evaluated at `point`.

    Covariant derivatives of the Killing data come from the transvection
    Taylor coefficients, d and d* are the algebraic ones built from them.
    """
    t0 = time_s()
    hm, m, E, lQ = model.hermitian, model.m, model.E, model.lambda_Q
    B = base_matrix(A, point)
    mag = _magnitude(model, B)
    om, Om, Omt = hm.omega, hm.kraines, hm.kraines_tilde

    X = x_of(model, B)
    dX = dx_of(model, B)
    dX0 = alpha_of(model, B)
    eps = epsilon_of(model, B)

    # nabla_u dX = 2 R(X ^ u)
    nabla_dX = covariant_derivatives(model, lambda C: dx_of(model, C), B)
    curv = np.stack([2.0 * model.curvature_operator(hm.vee(X, u)) for u in np.eye(model.dim)])

    qsum1 = sum(interior(u, hm.proj_Q(hm.vee(u, X))) for u in np.eye(model.dim))
    qsum2 = sum(wedge(u, hm.proj_Q(hm.vee(u, X))) for u in np.eye(model.dim))

    N_alpha = covariant_derivatives(model, lambda C: alpha_of(model, C), B)
    N_beta = covariant_derivatives(model, lambda C: beta_of(model, C), B)
    N_eps = covariant_derivatives(model, lambda C: epsilon_of(model, C), B)
    dz = covariant_derivatives(model, lambda C: z_of(model, C), B)

    out = [
        residual_result(SUITE, "killing_curvature_equation", "nabla_U dX = 2 R(X ^ U)",
                        _residual(nabla_dX, curv, mag), tol),
        residual_result(SUITE, "moment_map_z", "X _| w = dz",
                        _residual(interior(X, om), dz, mag), tol),
        residual_result(SUITE, "moment_map_trace", "<dX, w> = 2E z",
                        _residual(inner(dX, om), 2.0 * E * z_of(model, B), mag), tol),
        residual_result(SUITE, "Q_contraction", "sum e_i _| (e_i ^ X)_Q = (3/m) X",
                        _residual(qsum1, 3.0 / m * X, mag), tol),
        residual_result(SUITE, "Q_wedge", "sum e^i ^ (e_i ^ X)_Q = -(1/2m) X _| Omega",
                        _residual(qsum2, -interior(X, Om) / (2.0 * m), mag), tol),
        residual_result(SUITE, "alpha_codifferential", "d* alpha = (2E(m-1)/m) X",
                        _residual(codifferential(N_alpha), 2.0 * E * (m - 1) / m * X, mag), tol),
        residual_result(SUITE, "alpha_differential", "d alpha = -(E/m) X _| w^2",
                        _residual(exterior_derivative(N_alpha), -E / m * interior(X, wedge(om, om)), mag), tol),
        residual_result(SUITE, "beta_differential", "d beta = (Lambda_Q/m) X _| Omega",
                        _residual(exterior_derivative(N_beta), lQ / m * interior(X, Om), mag), tol),
        residual_result(SUITE, "beta_codifferential", "d* beta = (6 Lambda_Q/m) X",
                        _residual(codifferential(N_beta), 6.0 * lQ / m * X, mag), tol),
        residual_result(SUITE, "epsilon_differential", "d eps = -(E/m) X _| Omega~",
                        _residual(exterior_derivative(N_eps), -E / m * interior(X, Omt), mag), tol),
        residual_result(SUITE, "epsilon_coclosed", "d* eps = 0",
                        max_abs(codifferential(N_eps)) / max(max_abs(N_eps), mag, 1e-300), tol),
        residual_result(SUITE, "killing_type", "(dX)_0 in E + Q",
                        _residual(dX0, hm.proj_E(dX0) + hm.proj_Q(dX0), mag), tol),
        residual_result(SUITE, "epsilon_contraction", "eps = -(1/2m) L*_dX Omega~",
                        _residual(eps, -lower_star(dX, Omt) / (2.0 * m), mag), tol),
    ]
    return _timed(out, t0)


def _bracket_sides(model: GrassmannAlgebraModel, B: np.ndarray):
    """
    Both sides of <[FJ, FJ], d_nabla(FJ)> = -2 <w ^ dF, F ^ dF> + 3/2 <dF, d L*_w (F ^ F)>
    for F = eps(X), with the bracket taken from the connection formula
    [h, h](X, Y) = -(nabla_{hX} h) Y + (nabla_{hY} h) X + h (d_nabla h)(X, Y).
    """
    hm = model.hermitian
    J, om = hm.J, hm.omega
    F = epsilon_of(model, B)
    NF = covariant_derivatives(model, lambda C: epsilon_of(model, C), B)

    h = endo_of(F) @ J
    Nh = np.einsum("kba,bc->kac", NF, J)
    D = np.einsum("kal->kla", Nh) - np.einsum("lak->kla", Nh)
    bracket = (
        -np.einsum("jk,jal->kla", h, Nh)
        + np.einsum("jl,jak->kla", h, Nh)
        + np.einsum("ab,klb->kla", h, D)
    )
    lhs = 0.5 * float(np.sum(bracket * D))

    dF = exterior_derivative(NF)
    NG = np.stack([lower_star(om, 2.0 * wedge(NF[k], F)) for k in range(model.dim)])
    dG = exterior_derivative(NG)
    rhs = -2.0 * float(inner(wedge(om, dF), wedge(F, dF))) + 1.5 * float(inner(dF, dG))
    return lhs, rhs


def check_hermitian_killing(
    model: GrassmannAlgebraModel, A: SuMatrix, tol: float, points: int = 6, seed: int = 0
) -> List[CheckResult]:
    t0 = time_s()
    hm, J = model.hermitian, model.hermitian.J
    c = potential_constant(model)

    def p_bilinear(C1, C2):
        return e_of(model, C1, C2) - q_of(model, C1, C2) - c * z_of(model, C1) * z_of(model, C2)

    hk, kp, fn = 0.0, 0.0, 0.0
    fn_sides = []
    pts = _points(model, points, seed)
    for g in pts:
        B = base_matrix(A, g)
        mag = _magnitude(model, B)
        X = x_of(model, B)
        psi = psi_of(model, B)
        lhs = covariant_derivatives(model, lambda C: phi_of(model, C), B)
        rhs = np.stack([interior(u, psi) + pullback(J, interior(u, psi)) for u in np.eye(model.dim)])
        hk = max(hk, _residual(lhs, rhs, mag))

        kp = max(kp, _residual(interior(X, phi_of(model, B)), gradient(model, p_bilinear, B), mag ** 2))

        left, right = _bracket_sides(model, B)
        fn = max(fn, _residual(left, right, mag ** 4))
        fn_sides.append((left, right))

    out = [
        residual_result(SUITE, "hermitian_killing_form", "nabla_U Phi = U _| Psi + J(U _| Psi)", hk, tol,
                        samples=len(pts)),
        residual_result(SUITE, "killing_potential", "X _| Phi = dp", kp, tol, samples=len(pts)),
        residual_result(SUITE, "bracket_pairing", "<[FJ,FJ], d(FJ)> = -2<w^dF, F^dF> + 3/2 <dF, d L*_w(F^F)>",
                        fn, tol, samples=len(pts), detail={"sides": fn_sides}),
    ]
    return _timed(out, t0)


def check_moment_maps(
    model: GrassmannAlgebraModel, A: SuMatrix, samples: int, tol: float, seed: int = 0
) -> List[CheckResult]:
    """
    Moment maps q, e, z and the potential p along geodesics through Haar points.

    Gradients and Laplacians come from second-order transvection Taylor data;
    g(X,X) + (E/m) z^2 + q + e is compared with its predicted constant value.
    """
    t0 = time_s()
    hm, m, E = model.hermitian, model.m, model.E
    lQ, lE = model.lambda_Q, model.lambda_E
    mu2 = model.mu2_exact(A, A)
    const = hamiltonian_constant(model, mu2)
    c = potential_constant(model)

    def qb(C1, C2):
        return q_of(model, C1, C2)

    def eb(C1, C2):
        return e_of(model, C1, C2)

    def zz(C1, C2):
        return z_of(model, C1) * z_of(model, C2)

    def pb(C1, C2):
        return eb(C1, C2) - qb(C1, C2) - c * zz(C1, C2)

    worst = dict.fromkeys(
        ["grad_q", "grad_e", "lap_q", "lap_e", "lap_z", "lap_z2", "lap_p", "constant"], 0.0
    )
    pts = _points(model, samples, seed)
    for g in pts:
        B = base_matrix(A, g)
        mag = _magnitude(model, B)
        X = x_of(model, B)
        xx = float(X @ X)
        dX = dx_of(model, B)
        q, e, z = qb(B, B), eb(B, B), z_of(model, B)
        p = p_of(model, B, mu2)
        m2 = mag ** 2

        worst["grad_q"] = max(worst["grad_q"], _residual(gradient(model, qb, B), interior(X, hm.proj_Q(dX)), m2))
        worst["grad_e"] = max(worst["grad_e"], _residual(gradient(model, eb, B), interior(X, hm.proj_E(dX)), m2))
        worst["lap_q"] = max(worst["lap_q"], _residual(
            laplacian(model, qb, B), 4.0 * lQ * q - 6.0 * lQ / m * xx, m2))
        worst["lap_e"] = max(worst["lap_e"], _residual(
            laplacian(model, eb, B), 4.0 * lE * e - lE * (m * m - 4) / (2.0 * m) * xx, m2))
        worst["lap_z"] = max(worst["lap_z"], _residual(
            linear_laplacian(model, lambda C: z_of(model, C), B), 2.0 * E * z, mag))
        worst["lap_z2"] = max(worst["lap_z2"], _residual(laplacian(model, zz, B), 4.0 * E * z * z - 2.0 * xx, m2))
        worst["lap_p"] = max(worst["lap_p"], _residual(laplacian(model, pb, B), 2.0 * E * p, m2))
        worst["constant"] = max(worst["constant"], _residual(xx + E / m * z * z + q + e, const, m2))

    k = len(pts)
    out = [
        residual_result(SUITE, "moment_map_q", "X _| (dX)_Q = dq", worst["grad_q"], tol, samples=k),
        residual_result(SUITE, "moment_map_e", "X _| (dX)_E = de", worst["grad_e"], tol, samples=k),
        residual_result(SUITE, "laplacian_q", "Delta q = 4 Lambda_Q q - (6 Lambda_Q/m) |X|^2",
                        worst["lap_q"], tol, samples=k),
        residual_result(SUITE, "laplacian_e", "Delta e = 4 Lambda_E e - (Lambda_E (m^2-4)/(2m)) |X|^2",
                        worst["lap_e"], tol, samples=k),
        residual_result(SUITE, "laplacian_z", "Delta z = 2E z", worst["lap_z"], tol, samples=k),
        residual_result(SUITE, "laplacian_z_square", "Delta z^2 = 4E z^2 - 2|X|^2", worst["lap_z2"], tol, samples=k),
        residual_result(SUITE, "potential_eigenfunction", "Delta p = 2E p", worst["lap_p"], tol, samples=k),
        residual_result(SUITE, "hamiltonian_constant",
                        "|X|^2 + (E/m) z^2 + q + e = ((m^2+8m+12) E/(4m)) mu2(X,X)",
                        worst["constant"], tol, samples=k, detail={"constant": const}),
    ]
    return _timed(out, t0)


def check_epsilon(model: GrassmannAlgebraModel, tol: float) -> List[CheckResult]:
    t0 = time_s()
    expected = model.N ** 2 - 1
    rank = epsilon_rank(model)
    eps_Z = epsilon_of(model, model.Z)
    out = [
        residual_result(SUITE, "epsilon_injective", "rank of A -> eps(X_A) jets = dim su(N)",
                        float(abs(rank - expected)), 0.5, detail={"rank": rank, "expected": expected}),
        residual_result(SUITE, "epsilon_of_generator", "eps(X_Z) = 0",
                        max_abs(eps_Z) / _magnitude(model, model.Z), tol),
    ]
    return _timed(out, t0)
