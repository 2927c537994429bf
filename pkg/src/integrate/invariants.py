from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.core.errors import UsageError
from src.grassmann.killing import dx_of, potential_constant, x_of, z_of
from src.grassmann.model import GrassmannAlgebraModel
from src.integrate.estimate import MCEstimate, estimate, sample_values
from src.integrate.sampler import HaarSampler
from src.lie_core import SuMatrix
from src.tensor_alg.forms import inner

KINDS = ("mu2", "mu3", "nu", "P")


@dataclass(frozen=True)
class FieldAt:
    """Killing data of one field at one Haar point, in the transvected frame."""

    X: np.ndarray
    dX: np.ndarray
    dX_Q: np.ndarray
    dX_E: np.ndarray
    z: float

    @property
    def xx(self) -> float:
        return float(self.X @ self.X)


def field_at(model: GrassmannAlgebraModel, A: SuMatrix, g: np.ndarray) -> FieldAt:
    B = g.conj().T @ A.entries @ g
    dX = dx_of(model, B)
    hm = model.hermitian
    return FieldAt(X=x_of(model, B), dX=dX, dX_Q=hm.proj_Q(dX), dX_E=hm.proj_E(dX), z=z_of(model, B))


def q_value(model: GrassmannAlgebraModel, f: FieldAt) -> float:
    return float(inner(f.dX_Q, f.dX_Q)) / (4.0 * model.lambda_Q)


def e_value(model: GrassmannAlgebraModel, f: FieldAt) -> float:
    return float(inner(f.dX_E, f.dX_E)) / (4.0 * model.lambda_E)


def p_value(model: GrassmannAlgebraModel, f: FieldAt, mu2: float) -> float:
    m = model.m
    return (
        e_value(model, f) - q_value(model, f)
        - potential_constant(model) * (f.z ** 2 + (m * m + 8 * m + 12) / 4.0 * mu2)
    )


def check_same_n(model: GrassmannAlgebraModel, matrices: Sequence[SuMatrix]) -> None:
    for A in matrices:
        if A.n != model.n:
            raise UsageError(f"Matrix for n={A.n} used with model n={model.n}")


def invariant_integrand(model: GrassmannAlgebraModel, matrices: Sequence[SuMatrix], kind: str):
    """
    Pointwise integrand of an invariant form.

    mu2(X, Y) = int z_X z_Y, mu3(X, Y, W) = int z_X z_Y z_W,
    nu(X1, X2, X3) = int <(dX1)_Q, (dX2)_Q> z_X3, P(X, X, Y) = int p_X z_Y.
    """
    check_same_n(model, matrices)
    arity = {"mu2": 2, "mu3": 3, "nu": 3, "P": 2}
    if kind not in arity:
        raise UsageError(f"Unknown invariant form {kind!r}, expected one of {KINDS}")
    if len(matrices) != arity[kind]:
        raise UsageError(f"{kind} takes {arity[kind]} matrices, got {len(matrices)}")

    if kind == "P":
        mu2 = model.mu2_exact(matrices[0], matrices[0])

    def f(_: int, g: np.ndarray) -> float:
        fields = [field_at(model, A, g) for A in matrices]
        if kind == "mu2":
            return fields[0].z * fields[1].z
        if kind == "mu3":
            return fields[0].z * fields[1].z * fields[2].z
        if kind == "nu":
            return float(inner(fields[0].dX_Q, fields[1].dX_Q)) * fields[2].z
        return p_value(model, fields[0], mu2) * fields[1].z

    return f


def invariant_forms(
    model: GrassmannAlgebraModel,
    matrices: Sequence[SuMatrix],
    kind: str,
    sampler: HaarSampler,
    n_samples: int,
    jobs: int = 1,
) -> MCEstimate:
    f = invariant_integrand(model, matrices, kind)
    return estimate(sample_values(f, sampler, n_samples, jobs)[:, 0], sampler.master_seed)


def bold_p_coefficients(model: GrassmannAlgebraModel):
    """(a, b) with P = a nu + b mu3."""
    m, E = model.m, model.E
    return -1.0 / (2.0 * model.lambda_Q), -E * (m + 6) / (m + 4)
