from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.core.errors import UsageError
from src.grassmann.model import GrassmannAlgebraModel
from src.lie_core import SuMatrix, su_basis
from src.tensor_alg.forms import form_of, inner, interior, lower_star, norm2, wedge, wedge_coefficients
from src.utils.calc_utils import is_unitary

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class KillingJet:
    """
    Second-order data of the Killing field X_A at the point gK.

    All tensors are expressed in the transvected orthonormal frame at gK,
    which identifies them with base-point data of A' = g^-1 A g.
    """

    A: SuMatrix = field(repr=False)
    point: np.ndarray = field(repr=False)
    X: np.ndarray
    nablaX: np.ndarray
    dX: np.ndarray
    dX_Q: np.ndarray
    dX_E: np.ndarray
    dX_0: np.ndarray
    z: float
    q: float
    e: float
    p: float

    @property
    def norm2_X(self) -> float:
        return float(self.X @ self.X)


# -- linear data of a matrix in su(N), read at the base point

def x_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    return model.coords_m(B)


def nabla_x_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    # nabla_u X = [B_k, u]
    Bk, _ = model.split(B)
    return model.ad_m(Bk)


def dx_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    return 2.0 * form_of(nabla_x_of(model, B))


def z_of(model: GrassmannAlgebraModel, B: np.ndarray) -> float:
    return model.g(B, model.Z)


def alpha_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    """(dX)_0, the primitive part of dX."""
    dX = dx_of(model, B)
    return dX - model.hermitian.proj_omega(dX)


def beta_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    return model.hermitian.proj_Q(dx_of(model, B))


def epsilon_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    hm, m = model.hermitian, model.m
    dX = dx_of(model, B)
    dX0 = dX - hm.proj_omega(dX)
    return dX0 - (m - 1) * (m + 4) / (3.0 * m) * hm.proj_Q(dX)


def phi_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    hm, m, E = model.hermitian, model.m, model.E
    dX = dx_of(model, B)
    coeff = 2.0 * E * (m - 4) / (m * (m + 4))
    return hm.proj_E(dX) - hm.proj_Q(dX) - coeff * z_of(model, B) * hm.omega


def psi_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    hm, m, E = model.hermitian, model.m, model.E
    om = hm.omega
    return -E / (2.0 * (m + 4)) * interior(x_of(model, B), hm.kraines + wedge(om, om))


def q_of(model: GrassmannAlgebraModel, B: np.ndarray, C: Optional[np.ndarray] = None) -> float:
    """Polarized q: <(dX_B)_Q, (dX_C)_Q> / (4 Lambda_Q)."""
    hm = model.hermitian
    bQ = hm.proj_Q(dx_of(model, B))
    cQ = bQ if C is None else hm.proj_Q(dx_of(model, C))
    return float(inner(bQ, cQ)) / (4.0 * model.lambda_Q)


def e_of(model: GrassmannAlgebraModel, B: np.ndarray, C: Optional[np.ndarray] = None) -> float:
    hm = model.hermitian
    bE = hm.proj_E(dx_of(model, B))
    cE = bE if C is None else hm.proj_E(dx_of(model, C))
    return float(inner(bE, cE)) / (4.0 * model.lambda_E)


def potential_constant(model: GrassmannAlgebraModel) -> float:
    """Coefficient c in p = e - q - c (z^2 + (m^2 + 8m + 12)/4 mu2)."""
    m = model.m
    return model.E * (m - 4) / (m * (m + 4))


def p_of(model: GrassmannAlgebraModel, B: np.ndarray, mu2: float, C: Optional[np.ndarray] = None) -> float:
    m = model.m
    C_ = B if C is None else C
    zz = z_of(model, B) * z_of(model, C_)
    return (
        e_of(model, B, C) - q_of(model, B, C)
        - potential_constant(model) * (zz + (m * m + 8 * m + 12) / 4.0 * mu2)
    )


def hamiltonian_constant(model: GrassmannAlgebraModel, mu2: float) -> float:
    """Value of g(X, X) + (E/m) z^2 + q + e on a unit-volume Grassmannian."""
    m = model.m
    return (m * m + 8 * m + 12) * model.E / (4.0 * m) * mu2


# -- geodesic Taylor data

def transvection_series(u: np.ndarray, B: np.ndarray, order: int = 2) -> List[np.ndarray]:
    """
    Taylor coefficients of exp(-t ad u) B.

    Along the geodesic exp(tu)K the field X_A reads, in the transvected
    frame, as X of A(t) = e^{-t ad u} A'. Returns [A0, A1, ..., A_order].
    """
    out = [np.asarray(B, dtype=complex)]
    for k in range(1, order + 1):
        prev = out[-1]
        out.append(-(u @ prev - prev @ u) / k)
    return out


def quadratic_series(bilinear: Callable[[np.ndarray, np.ndarray], float], coeffs: List[np.ndarray]) -> Tuple[float, float, float]:
    """First three Taylor coefficients of t -> bilinear(A(t), A(t))."""
    a0, a1, a2 = coeffs[:3]
    c0 = bilinear(a0, a0)
    c1 = 2.0 * bilinear(a0, a1)
    c2 = 2.0 * bilinear(a0, a2) + bilinear(a1, a1)
    return c0, c1, c2


def gradient(model: GrassmannAlgebraModel, bilinear, B: np.ndarray) -> np.ndarray:
    """Differential of f = bilinear(A, A) at the base point, on the basis of m."""
    return np.array([
        quadratic_series(bilinear, transvection_series(u, B, 2))[1]
        for u in model.m_basis
    ])


def laplacian(model: GrassmannAlgebraModel, bilinear, B: np.ndarray) -> float:
    """Delta f = -sum_i d^2/dt^2 f(exp(t e_i) K) for f = bilinear(A, A)."""
    return -sum(2.0 * quadratic_series(bilinear, transvection_series(u, B, 2))[2] for u in model.m_basis)


def linear_laplacian(model: GrassmannAlgebraModel, fn, B: np.ndarray) -> np.ndarray:
    return -sum(2.0 * np.asarray(fn(transvection_series(u, B, 2)[2])) for u in model.m_basis)


def covariant_derivatives(model: GrassmannAlgebraModel, fn, B: np.ndarray) -> np.ndarray:
    """nabla_{e_k} of a tensor depending linearly on A, stacked over k."""
    return np.stack([np.asarray(fn(transvection_series(u, B, 1)[1])) for u in model.m_basis])


# -- exterior calculus from covariant derivatives

def exterior_derivative(N: np.ndarray) -> np.ndarray:
    """d alpha = sum e^k ^ nabla_k alpha, N[k] = nabla_k alpha for a 2-form alpha."""
    return N + N.transpose(1, 2, 0) + N.transpose(2, 0, 1)


def codifferential(N: np.ndarray) -> np.ndarray:
    """d* alpha = -sum e_k _| nabla_k alpha for a 2-form alpha."""
    return -np.einsum("kkj->j", N)


# -- jets

def base_matrix(A: SuMatrix, point: Optional[np.ndarray]) -> np.ndarray:
    if point is None:
        return np.asarray(A.entries)
    if not is_unitary(point, UNITARY_TOL) or point.shape != A.entries.shape:
        raise UsageError("Point must be a unitary matrix of the same size as A")
    return A.conjugated(point).entries


def killing_jet(
    model: GrassmannAlgebraModel,
    A: SuMatrix,
    point: Optional[np.ndarray] = None,
    mu2: Optional[float] = None,
) -> KillingJet:
    if A.n != model.n:
        raise UsageError(f"Matrix for n={A.n} used with model n={model.n}")
    g = np.eye(model.N, dtype=complex) if point is None else np.asarray(point, dtype=complex)
    B = base_matrix(A, g)
    hm = model.hermitian
    mu2 = model.mu2_exact(A, A) if mu2 is None else mu2

    nX = nabla_x_of(model, B)
    dX = 2.0 * form_of(nX)
    return KillingJet(
        A=A,
        point=g,
        X=x_of(model, B),
        nablaX=nX,
        dX=dX,
        dX_Q=hm.proj_Q(dX),
        dX_E=hm.proj_E(dX),
        dX_0=dX - hm.proj_omega(dX),
        z=z_of(model, B),
        q=float(norm2(hm.proj_Q(dX))) / (4.0 * model.lambda_Q),
        e=float(norm2(hm.proj_E(dX))) / (4.0 * model.lambda_E),
        p=p_of(model, B, mu2),
    )


def epsilon_map(model: GrassmannAlgebraModel, A: SuMatrix, point: Optional[np.ndarray] = None) -> np.ndarray:
    return epsilon_of(model, base_matrix(A, point))


def epsilon_rank(model: GrassmannAlgebraModel) -> int:
    """Rank of A -> (eps(X_A), nabla eps(X_A)) at the base point over a basis of su(N)."""
    rows = []
    for B in su_basis(model.n):
        eps = epsilon_of(model, B)
        nabla = covariant_derivatives(model, lambda C: epsilon_of(model, C), B)
        rows.append(np.r_[eps.ravel(), nabla.ravel()])
    return int(np.linalg.matrix_rank(np.stack(rows), tol=1e-9))


def combine_halves(model: GrassmannAlgebraModel, first: float, second: float) -> float:
    return 3.0 * first - 4.0 * model.E * second


def obstruction_integrand(model: GrassmannAlgebraModel, B: np.ndarray) -> float:
    """3 <w ^ d eps, eps ^ d eps> - 4E <eps ^ eps, eps ^ w> with d eps = -(E/m) X _| Omega~."""
    return combine_halves(model, *obstruction_halves(model, B))


def d_epsilon_of(model: GrassmannAlgebraModel, B: np.ndarray) -> np.ndarray:
    return -model.E / model.m * interior(x_of(model, B), model.hermitian.kraines_tilde)


def obstruction_halves(model: GrassmannAlgebraModel, B: np.ndarray) -> Tuple[float, float]:
    """(<w ^ d eps, eps ^ d eps>, <eps ^ eps, eps ^ w>), paired on compressed coefficients."""
    om = model.hermitian.omega
    eps = epsilon_of(model, B)
    deps = d_epsilon_of(model, B)
    first = wedge_coefficients(om, deps) @ wedge_coefficients(eps, deps)
    second = wedge_coefficients(eps, eps) @ wedge_coefficients(eps, om)
    return float(first), float(second)


def lower_omega_square(model: GrassmannAlgebraModel, F: np.ndarray) -> np.ndarray:
    return lower_star(model.hermitian.omega, wedge(F, F))
