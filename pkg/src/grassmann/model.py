from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from src.core.errors import ConstructionError, UsageError
from src.lie_core import SuMatrix, su_basis
from src.tensor_alg.forms import basis_form, compress, index_sets, inner
from src.tensor_alg.hermitian import HermitianModel, QUAT_UNITS
from src.utils.calc_utils import max_abs

STRUCTURE_TOL = 1e-12
SPECTRUM_TOL = 1e-10


def _bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


@dataclass(frozen=True)
class GrassmannAlgebraModel:
    """
    Base-point model of Gr_2(C^{n+2}) = SU(n+2)/S(U(2) x U(n)).

    The tangent space m is identified with the lower-left n x 2 block of
    su(n+2), in the real coordinates of `HermitianModel.quaternionic(n)`. The
    metric is `metric_scale` times the trace form -Re tr(AB); J = ad(Z) and
    the triple Ia = ad(Sa) restricted to m, with Sa the su(2) factor.

    Parameters
    ----------
    n : int
        Grassmann parameter, N = n + 2 and m = 2n.

    metric_scale : float
        Factor in front of the trace form.
    """

    n: int
    metric_scale: float
    m_basis: np.ndarray = field(repr=False)
    k_basis: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    hermitian: HermitianModel = field(repr=False)
    curvature: np.ndarray = field(repr=False)
    E: float = 0.0
    lambda_Q: float = 0.0
    lambda_E: float = 0.0
    residuals: Dict[str, float] = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.n + 2

    @property
    def m(self) -> int:
        return 2 * self.n

    @property
    def dim(self) -> int:
        return 4 * self.n

    # -- algebra

    def g(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(-self.metric_scale * np.real(np.trace(a @ b)))

    def coords_m(self, M: np.ndarray) -> np.ndarray:
        return -self.metric_scale * np.real(np.einsum("kij,ji->k", self.m_basis, M))

    def from_m(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=float), self.m_basis, axes=(0, 0))

    def split(self, A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(k-part, m-part) of a matrix in su(N)."""
        Am = self.from_m(self.coords_m(A))
        return A - Am, Am

    def ad_m(self, K: np.ndarray) -> np.ndarray:
        """Matrix of ad(K) restricted to m, columns are images of the basis."""
        return np.stack([self.coords_m(_bracket(K, e)) for e in self.m_basis], axis=1)

    def z_vector_norm2(self) -> float:
        return self.g(self.Z, self.Z)

    def mu2_exact(self, A: SuMatrix, B: SuMatrix) -> float:
        """Haar average of z_A z_B, equal to g(A, B)|Z|^2 / (N^2 - 1) by Schur's lemma."""
        return self.g(A.entries, B.entries) * self.z_vector_norm2() / (self.N ** 2 - 1)

    # -- curvature

    def curvature_operator(self, alpha: np.ndarray) -> np.ndarray:
        """Action of R on 2-forms: (R alpha)_{ij} = 1/2 alpha_{ab} R_{abij}."""
        return 0.5 * np.tensordot(alpha, self.curvature, axes=([0, 1], [0, 1]))

    def curvature_endo(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """R(u, v) as an endomorphism of m."""
        return np.einsum("a,b,abcd->dc", u, v, self.curvature)

    def ricci(self) -> np.ndarray:
        return np.einsum("abad->bd", self.curvature)

    def curvature_matrix(self) -> np.ndarray:
        """R on the orthonormal basis e^I of 2-forms."""
        forms = [basis_form(self.dim, I) for I in index_sets(self.dim, 2)]
        return np.stack([compress(self.curvature_operator(f), 2) for f in forms], axis=1)


def _m_basis(n: int, scale: float) -> np.ndarray:
    N = n + 2
    out = []
    s = 1.0 / np.sqrt(2.0 * scale)
    for unit in (1.0, 1j):
        for r in range(n):
            for c in range(2):
                C = np.zeros((n, 2), dtype=complex)
                C[r, c] = unit * s
                M = np.zeros((N, N), dtype=complex)
                M[2:, :2] = C
                M[:2, 2:] = -C.conj().T
                out.append(M)
    return np.stack(out)


def _k_basis(n: int, scale: float) -> np.ndarray:
    basis = su_basis(n)
    off = np.abs(basis[:, 2:, :2]).reshape(len(basis), -1).max(axis=1)
    return basis[off == 0.0] / np.sqrt(scale)


def build_model(n: int, metric_scale: float = 1.0) -> GrassmannAlgebraModel:
    if int(n) != n or n < 2:
        raise UsageError(f"Grassmann parameter must be an integer >= 2, got {n}")
    if metric_scale <= 0:
        raise UsageError(f"Metric scale must be positive, got {metric_scale}")
    N = n + 2
    m_basis = _m_basis(n, metric_scale)
    k_basis = _k_basis(n, metric_scale)
    Z = (1j / N) * np.diag(np.r_[n, n, -2.0 * np.ones(n)]).astype(complex)
    S = np.zeros((2, N, N), dtype=complex)
    S[0, :2, :2], S[1, :2, :2] = QUAT_UNITS

    def g(a, b):
        return -metric_scale * np.real(np.einsum("...ij,...ji->...", a, b))

    def coords(M):
        return -metric_scale * np.real(np.einsum("kij,ji->k", m_basis, M))

    residuals: Dict[str, float] = {}

    gram = g(m_basis[:, None], m_basis[None, :])
    residuals["m orthonormal"] = max_abs(gram - np.eye(len(m_basis)))
    residuals["k orthogonal to m"] = max_abs(g(k_basis[:, None], m_basis[None, :]))
    if len(k_basis) + len(m_basis) != N * N - 1:
        raise ConstructionError("dim k + dim m = dim su(N)", float(abs(len(k_basis) + len(m_basis) - N * N + 1)))

    brackets_mm = np.einsum("aij,bjk->abik", m_basis, m_basis)
    brackets_mm = brackets_mm - brackets_mm.transpose(1, 0, 2, 3)
    mm_in_m = -metric_scale * np.real(np.einsum("abij,cji->abc", brackets_mm, m_basis))
    residuals["[m,m] in k"] = max_abs(mm_in_m)
    brackets_km = np.einsum("aij,bjk->abik", k_basis, m_basis) - np.einsum("bij,ajk->abik", m_basis, k_basis)
    km_in_k = -metric_scale * np.real(np.einsum("abij,cji->abc", brackets_km, k_basis))
    residuals["[k,m] in m"] = max_abs(km_in_k)

    def ad(K):
        return np.stack([coords(_bracket(K, e)) for e in m_basis], axis=1)

    J = ad(Z)
    I1, I2 = ad(S[0]), ad(S[1])

    # R(u, v) w = [[u, v], w]; curvature[a, b, c, d] = g(R(e_a, e_b) e_c, e_d)
    rww = np.einsum("abij,cjk->abcik", brackets_mm, m_basis) - np.einsum("cij,abjk->abcik", m_basis, brackets_mm)
    curvature = -metric_scale * np.real(np.einsum("abcij,dji->abcd", rww, m_basis))

    for relation, r in residuals.items():
        if r > STRUCTURE_TOL:
            raise ConstructionError(relation, r)

    hermitian = HermitianModel(J=J, I=np.stack([I1, I2, I1 @ I2]))
    reference = HermitianModel.quaternionic(n)
    residuals["J = ad(Z)|m"] = max_abs(J - reference.J)
    residuals["Ia = ad(Sa)|m"] = max_abs(hermitian.I - reference.I)
    for relation in ("J = ad(Z)|m", "Ia = ad(Sa)|m"):
        if residuals[relation] > STRUCTURE_TOL:
            raise ConstructionError(relation, residuals[relation])

    ric = np.einsum("abad->bd", curvature)
    dim = 4 * n
    E = float(np.trace(ric) / dim)
    residuals["Ric = E g"] = max_abs(ric - E * np.eye(dim)) / abs(E)
    if residuals["Ric = E g"] > SPECTRUM_TOL or E <= 0:
        raise ConstructionError("Ric = E g with E > 0", residuals["Ric = E g"])

    def R_op(alpha):
        return 0.5 * np.tensordot(alpha, curvature, axes=([0, 1], [0, 1]))

    w1 = hermitian.omegas[0]
    lam_Q = float(inner(R_op(w1), w1) / inner(w1, w1))
    rng = np.random.default_rng(0)
    FE = hermitian.proj_E(hermitian.random_primitive_11(rng))
    lam_E = float(inner(R_op(FE), FE) / inner(FE, FE))
    m = 2 * n
    residuals["Lambda_Q / E"] = abs(lam_Q / E - m / (m + 4))
    residuals["Lambda_E / E"] = abs(lam_E / E - 4 / (m + 4))
    for relation in ("Lambda_Q / E", "Lambda_E / E"):
        if residuals[relation] > SPECTRUM_TOL:
            raise ConstructionError(relation, residuals[relation])

    curvature.setflags(write=False)
    return GrassmannAlgebraModel(
        n=n,
        metric_scale=float(metric_scale),
        m_basis=m_basis,
        k_basis=k_basis,
        Z=Z,
        S=S,
        hermitian=hermitian,
        curvature=curvature,
        E=E,
        lambda_Q=lam_Q,
        lambda_E=lam_E,
        residuals=residuals,
    )
