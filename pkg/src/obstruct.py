from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import UsageError
from src.core.events import CheckResult, inconclusive_result, residual_result, zscore_result
from src.grassmann.killing import (
    combine_halves, d_epsilon_of, dx_of, epsilon_of, lower_omega_square, obstruction_halves, obstruction_integrand, x_of,
)
from src.grassmann.model import GrassmannAlgebraModel
from src.integrate.estimate import MCEstimate, estimate, estimate_columns, sample_values
from src.integrate.invariants import check_same_n, field_at, p_value
from src.integrate.sampler import HaarSampler
from src.lie_core import MEMBER_TOL, SuMatrix, cubic_p0, hyperquadric_member, hyperquadric_residual, random_su, su_basis, vanc_odd_check
from src.tensor_alg.forms import inner, interior, wedge_coefficients
from src.utils.calc_utils import lstsq_scale, max_abs
from src.utils.misc_utils import time_s

SUITE = "obstruct"

# stderr floor, relative to the natural scale of an integrand, for integrands vanishing up to rounding
NOISE_FLOOR = 1e-10


class Verdict(str, Enum):
    INTEGRABLE = "integrable_to_second_order"
    OBSTRUCTED = "obstructed"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ObstructionVerdict:
    A: SuMatrix = field(repr=False)
    P_direct: Optional[MCEstimate]
    P_closed: Optional[Tuple[float, MCEstimate]]
    in_hyperquadric: bool
    potential_vanishes: bool
    pairing_zscores: np.ndarray = field(repr=False)
    verdict: Verdict
    diagnostics: Dict[str, Any] = field(default_factory=dict)


# -- constants

def alg_constants(m: int) -> Tuple[float, float]:
    """(c1, c2) with -3 c1 = (m-1)^2 (m+3) - 15m + 9 and 9 c2 = 4 (m-1)(m-4)(m+4)."""
    c1 = -((m - 1) ** 2 * (m + 3) - 15 * m + 9) / 3.0
    c2 = 4.0 * (m - 1) * (m - 4) * (m + 4) / 9.0
    return c1, c2


def _require_m_not_4(model: GrassmannAlgebraModel, what: str) -> None:
    if model.m == 4:
        raise UsageError(f"{what} is defined for m != 4 only; at m = 4 the polynomial is 6E^2 nu")


def first_half_constant(model: GrassmannAlgebraModel) -> float:
    """c3 with int <w ^ d eps, eps ^ d eps> = c3 mu3 for m != 4."""
    _require_m_not_4(model, "c3")
    m, E = model.m, model.E
    c1, c2 = alg_constants(m)
    return -8.0 * E ** 4 * (m * m - 4) / (m ** 3 * (m - 4)) * (2.0 * c1 + c2)


def second_half_constant(model: GrassmannAlgebraModel) -> float:
    """int <eps ^ eps, eps ^ w> = const * mu3, vanishing together with mu3 at m = 4."""
    m, E = model.m, model.E
    return 8.0 * (m * m - 4) * E ** 3 / (m * m)


def closed_form_coefficient(model: GrassmannAlgebraModel) -> float:
    _require_m_not_4(model, "The mu3 closed form")
    m, E = model.m, model.E
    return 16.0 * E ** 4 * (m * m - 4) ** 2 * (m - 1) / (3.0 * m ** 3 * (m - 4))


def closed_form(model: GrassmannAlgebraModel) -> Tuple[float, str]:
    """(coefficient, invariant) with P = coefficient * invariant(X, X, X)."""
    if model.m == 4:
        return 6.0 * model.E ** 2, "nu"
    return closed_form_coefficient(model), "mu3"


# -- pointwise data

def _j_pair(model: GrassmannAlgebraModel, v: np.ndarray) -> np.ndarray:
    return model.hermitian.vee(v, model.hermitian.J @ v)


def _norm(F: np.ndarray) -> float:
    return float(np.sqrt(inner(F, F)))


def _rel(lhs: float, rhs: float, scale: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), scale, 1e-300)


def _sample_row(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    """
    Per-point quantities of the obstruction at one Haar point.

    Columns: integrand, first half, second half, z^3, <dX_Q, dX_Q> z,
    <eps, X ^ JX>, <eps_Q, X ^ JX>, then relative residuals of three
    pointwise identities.
    """
    hm, m, E = model.hermitian, model.m, model.E
    c1, c2 = alg_constants(m)
    X = x_of(model, B)
    z = model.g(B, model.Z)
    eps = epsilon_of(model, B)
    eps_Q = hm.proj_Q(eps)
    first, second = obstruction_halves(model, B)
    deps = d_epsilon_of(model, B)

    dX = dx_of(model, B)
    dX_Q = hm.proj_Q(dX)
    dX_0 = dX - hm.proj_omega(dX)
    xjx = _j_pair(model, X)
    pe, pq = float(inner(eps, xjx)), float(inner(eps_Q, xjx))

    cons_rhs = 4.0 * E * E / (m * m) * (c1 * pe + c2 * pq)
    # pairings are scaled by Cauchy-Schwarz bounds from the norms of their factors
    cons = abs(first - cons_rhs) / max(np.sqrt(m) * _norm(eps) * _norm(deps) ** 2, 1e-300)

    a = wedge_coefficients(dX_0, dX_Q)
    b = wedge_coefficients(eps, hm.omega)
    last = abs(float(a @ b)) / max(_norm(dX_0) * _norm(dX_Q) * _norm(eps) * np.sqrt(m), 1e-300)

    qq = float(inner(dX_Q, dX_Q))
    sq_lhs = lower_omega_square(model, dX_Q)
    sq_rhs = -2.0 / m * qq * hm.omega
    sq = max_abs(sq_lhs - sq_rhs) / max(max_abs(sq_lhs), max_abs(sq_rhs), 1e-300)

    return np.array([
        combine_halves(model, first, second), first, second, z ** 3, qq * z, pe, pq, cons, last, sq,
    ])


def _base(A: SuMatrix, g: np.ndarray) -> np.ndarray:
    return g.conj().T @ A.entries @ g


# -- operations

def obstruction_direct(
    model: GrassmannAlgebraModel, A: SuMatrix, sampler: HaarSampler, n_samples: int, jobs: int = 1,
) -> MCEstimate:
    """Haar average of 3 <w ^ d eps, eps ^ d eps> - 4E <eps ^ eps, eps ^ w>."""
    check_same_n(model, [A])

    def f(_: int, g: np.ndarray) -> float:
        return obstruction_integrand(model, _base(A, g))

    return estimate(sample_values(f, sampler, n_samples, jobs)[:, 0], sampler.master_seed)


def obstruction_closed_form(
    model: GrassmannAlgebraModel,
    A: SuMatrix,
    sampler: HaarSampler,
    n_samples: int,
    accept: float = 3.0,
    reject: float = 5.0,
    tol: float = 1e-8,
    jobs: int = 1,
) -> Tuple[List[CheckResult], Tuple[float, MCEstimate], MCEstimate]:
    """
    Closed form of the obstruction polynomial and its summand identities.

    All estimates share one Haar sample. Returns the check records, the
    closed form as (coefficient, invariant estimate) and the direct estimate.
    """
    check_same_n(model, [A])
    m, E = model.m, model.E
    t0 = time_s()
    values = sample_values(lambda _, g: _sample_row(model, _base(A, g)), sampler, n_samples, jobs)
    wall = time_s() - t0
    D, F1, F2, z3, nuz, pe, pq = (values[:, k] for k in range(7))

    coef, kind = closed_form(model)
    invariant = z3 if kind == "mu3" else nuz
    first_rhs = (first_half_constant(model) * z3) if m != 4 else 2.0 * E * E * nuz
    diffs = [
        ("closed_form", f"P = {'6E^2 nu' if m == 4 else '16E^4 (m^2-4)^2 (m-1)/(3m^3 (m-4)) mu3'}", D - coef * invariant),
        ("first_half", "int <w ^ d eps, eps ^ d eps> = " + ("2E^2 nu" if m == 4 else "c3 mu3"), F1 - first_rhs),
        ("second_half", "int <eps ^ eps, eps ^ w> = (8(m^2-4)E^3/m^2) mu3", F2 - second_half_constant(model) * z3),
    ]
    if m != 4:
        k = E * E * (m * m - 4) / (m * (m - 4))
        diffs += [
            ("pairing_epsilon", "int <eps, X ^ JX> = -(4E^2 (m^2-4)/(m(m-4))) mu3", pe + 4.0 * k * z3),
            ("pairing_epsilon_Q", "int <eps_Q, X ^ JX> = -(2E^2 (m^2-4)/(m(m-4))) mu3", pq + 2.0 * k * z3),
        ]

    ests = estimate_columns(np.stack([d for _, _, d in diffs], axis=1), sampler.master_seed)
    results = [
        replace(
            zscore_result(SUITE, name, ref, est.zscore(0.0), accept, reject, n_samples, detail=est.as_detail()),
            wall_time=wall / len(diffs),
        )
        for (name, ref, _), est in zip(diffs, ests)
    ]
    results += [
        residual_result(SUITE, "cons_pointwise", "<w ^ dF, F ^ dF> = (4E^2/m^2)(c1 <F, X ^ JX> + c2 <F_Q, X ^ JX>)",
                        float(np.max(values[:, 7])), tol, samples=n_samples),
        residual_result(SUITE, "orthogonality_last", "<(dX)_0 ^ (dX)_Q, eps ^ w> = 0",
                        float(np.max(values[:, 8])), tol, samples=n_samples),
        residual_result(SUITE, "square_Q", "L*_w ((dX)_Q ^ (dX)_Q) = -(2/m) |(dX)_Q|^2 w",
                        float(np.max(values[:, 9])), tol, samples=n_samples),
    ]
    seed = sampler.master_seed
    return results, (coef, estimate(invariant, seed)), estimate(D, seed)


def check_alg_identity(model: GrassmannAlgebraModel, tol: float, seed: int = 0, trials: int = 5) -> List[CheckResult]:
    """Pointwise g(w ^ (v _| Om~), F ^ (v _| Om~)) = 4 c1 g(F, v ^ Jv) + 4 c2 g(F_Q, v ^ Jv) on F in E + Q."""
    hm = model.hermitian
    c1, c2 = alg_constants(model.m)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        v = hm.random_vector(rng)
        F = hm.random_E_plus_Q(rng)
        vO = interior(v, hm.kraines_tilde)
        lhs = float(wedge_coefficients(hm.omega, vO) @ wedge_coefficients(F, vO))
        vjv = _j_pair(model, v)
        rhs = 4.0 * c1 * float(inner(F, vjv)) + 4.0 * c2 * float(inner(hm.proj_Q(F), vjv))
        worst = max(worst, _rel(lhs, rhs, 0.0))
    return [residual_result(SUITE, "alg_identity", "g(w ^ (v _| Om~), F ^ (v _| Om~)) = 4c1 g(F, v ^ Jv) + 4c2 g(F_Q, v ^ Jv)",
                            worst, tol, samples=trials, detail={"c1": c1, "c2": c2})]


def proportionality_c(
    model: GrassmannAlgebraModel,
    sample_count: int,
    sampler: HaarSampler,
    n_samples: int,
    seed: int = 0,
    accept: float = 3.0,
    reject: float = 5.0,
    jobs: int = 1,
) -> Tuple[List[CheckResult], float]:
    """
    Fit P(X_A) = c P0(A, A, A) over `sample_count` random unit matrices.

    The fitted c is reported, not compared with any target.
    """
    if sample_count < 1:
        raise UsageError(f"Need at least one matrix for the fit, got {sample_count}")
    mats = []
    for k in range(sample_count):
        A = random_su(model.n, seed + k)
        mats.append(A.scaled(1.0 / A.norm()))
    ests = [obstruction_direct(model, A, sampler, n_samples, jobs) for A in mats]
    p0 = np.array([cubic_p0(A, A, A) for A in mats])
    P = np.array([e.mean for e in ests])
    err = np.array([e.stderr for e in ests])

    detail: Dict[str, Any] = {"p0": p0.tolist(), "P": P.tolist(), "stderr": err.tolist()}
    if model.n % 2:
        detail["note"] = "hyperquadric is {0} for odd n: vanishing of the cubic does not make a direction unobstructed"
    if max_abs(p0) < 1e-12:
        return [inconclusive_result(SUITE, "proportionality_fit", "P = c P0", "all P0 values vanish", detail)], float("nan")

    w = 1.0 / np.maximum(err, 1e-300) ** 2
    c, resid = lstsq_scale(p0, P, w)
    z = np.abs(resid) / np.maximum(err, NOISE_FLOOR * max(1.0, max_abs(P)))
    detail.update({"c": c, "residual_norm": float(np.linalg.norm(resid)), "zscores": z.tolist()})
    return [zscore_result(SUITE, "proportionality_fit", "P = c P0", float(np.max(z)), accept, reject,
                          n_samples * sample_count, detail=detail)], c


def pairing_zscores(
    model: GrassmannAlgebraModel, A: SuMatrix, values: np.ndarray, seed: Optional[int] = None,
) -> np.ndarray:
    """z-scores of P(X, X, B_i) over an orthonormal basis, from per-sample columns p_X z_{B_i}."""
    floor = NOISE_FLOOR * max(1.0, model.E) * model.g(A.entries, A.entries) * np.sqrt(model.z_vector_norm2())
    return np.array([e.zscore(0.0, floor) for e in estimate_columns(values, seed)])


def classify(
    model: GrassmannAlgebraModel,
    A: SuMatrix,
    sampler: HaarSampler,
    n_samples: int,
    tol: float = 1e-8,
    accept: float = 3.0,
    reject: float = 5.0,
    points: int = 20,
    member_tol: float = MEMBER_TOL,
    with_polynomial: bool = True,
    jobs: int = 1,
) -> ObstructionVerdict:
    check_same_n(model, [A])
    basis = su_basis(model.n)
    mu2 = model.mu2_exact(A, A)
    coef, kind = closed_form(model)

    def f(_: int, g: np.ndarray) -> np.ndarray:
        B = _base(A, g)
        x = field_at(model, A, g)
        p = p_value(model, x, mu2)
        W = g @ model.Z @ g.conj().T
        zB = -model.metric_scale * np.real(np.einsum("kij,ji->k", basis, W))
        row = [p * zB]
        if with_polynomial:
            inv = x.z ** 3 if kind == "mu3" else float(inner(x.dX_Q, x.dX_Q)) * x.z
            row.append([obstruction_integrand(model, B), inv])
        return np.concatenate(row)

    values = sample_values(f, sampler, n_samples, jobs)
    k = len(basis)
    zs = pairing_zscores(model, A, values[:, :k], sampler.master_seed)

    P_direct = P_closed = None
    if with_polynomial:
        P_direct = estimate(values[:, k], sampler.master_seed)
        P_closed = (coef, estimate(values[:, k + 1], sampler.master_seed))

    scale = max(1.0, model.E) * model.g(A.entries, A.entries)
    p_max = max((abs(p_value(model, field_at(model, A, sampler.unitary(i)), mu2)) for i in range(points)), default=0.0)
    potential_vanishes = p_max <= tol * scale
    member = hyperquadric_member(A, member_tol)

    diagnostics: Dict[str, Any] = {
        "hyperquadric_residual": hyperquadric_residual(A),
        "potential_max": p_max,
        "potential_points": points,
        "max_zscore": float(np.max(zs)) if len(zs) else 0.0,
    }
    if potential_vanishes != member:
        verdict = Verdict.INCONCLUSIVE
        diagnostics["reason"] = "pointwise potential test disagrees with hyperquadric membership"
    elif member and np.all(zs < accept):
        verdict = Verdict.INTEGRABLE
    elif not member and np.any(zs > reject):
        verdict = Verdict.OBSTRUCTED
    else:
        verdict = Verdict.INCONCLUSIVE
        diagnostics["reason"] = "pairing z-scores between accept and reject thresholds"

    return ObstructionVerdict(
        A=A,
        P_direct=P_direct,
        P_closed=P_closed,
        in_hyperquadric=member,
        potential_vanishes=potential_vanishes,
        pairing_zscores=zs,
        verdict=verdict,
        diagnostics=diagnostics,
    )


def rigidity_scan(
    model: GrassmannAlgebraModel,
    count: int,
    sampler: HaarSampler,
    n_samples: int,
    seed: int = 0,
    accept: float = 3.0,
    reject: float = 5.0,
    jobs: int = 1,
) -> List[CheckResult]:
    """Classify `count` random directions; for odd n also restate why the hyperquadric is {0}."""
    verdicts = [
        classify(model, random_su(model.n, seed + k), sampler, n_samples,
                 accept=accept, reject=reject, with_polynomial=False, jobs=jobs).verdict
        for k in range(count)
    ]
    tally = {v.value: sum(1 for x in verdicts if x is v) for v in Verdict}
    not_rejected = count - tally[Verdict.OBSTRUCTED.value]
    out = [residual_result(SUITE, "unrejected_directions", "every random nonzero direction obstructed at the reject threshold",
                           float(not_rejected), 0.5, samples=count, detail=tally)]
    if model.n % 2:
        report = vanc_odd_check(model.n, trials=count, seed=seed)
        out.append(residual_result(SUITE, "hyperquadric_empty", "hyperquadric = {0} for odd n",
                                   0.0 if report["passed"] else 1.0, 0.5, samples=count, detail=report))
    return out


def constants_summary(model: GrassmannAlgebraModel) -> Dict[str, Any]:
    """
    Normalized constants of the model: eigenvalue ratios, c1, c2, c3 / E^4 and
    the closed-form coefficient / E^4, or the "6E^2 nu" branch at m = 4.
    """
    m, E = model.m, model.E
    c1, c2 = alg_constants(m)
    row: Dict[str, Any] = {
        "n": model.n,
        "m": m,
        "E": E,
        "lambda_Q_over_E": model.lambda_Q / E,
        "lambda_E_over_E": model.lambda_E / E,
        "c1": c1,
        "c2": c2,
        "c3_over_E4": None,
        "closed_form_over_E4": None,
        "closed_form": "6E^2 nu" if m == 4 else "coefficient * mu3",
    }
    if m != 4:
        row["c3_over_E4"] = first_half_constant(model) / E ** 4
        row["closed_form_over_E4"] = closed_form_coefficient(model) / E ** 4
    return row
