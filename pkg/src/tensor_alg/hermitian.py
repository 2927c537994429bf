from dataclasses import dataclass, field
from typing import Optional, Dict

import numpy as np

from src.core.errors import ConstructionError, UsageError
from src.tensor_alg.forms import (
    inner, wedge, pullback, form_of, endo_of, derivation, lower_star,
)
from src.utils.calc_utils import max_abs

MODEL_TOL = 1e-12

# unit quaternions acting on the right of C^{n x 2}; the third is generated as I1 I2
QUAT_UNITS = (
    np.array([[1j, 0.0], [0.0, -1j]]),
    np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex),
)


@dataclass(frozen=True)
class HermitianModel:
    """
    Euclidean model space R^{2m} with complex structure and optional
    quaternionic triple, together with the projectors of 2-forms onto the
    omega line, Lambda^{1,1}_0, Q, E, F and of symmetric endomorphisms onto S^{2,+-}.

    Parameters
    ----------
    J : np.ndarray
        Orthogonal complex structure, J^2 = -id.

    I : np.ndarray, optional
        Stacked triple (3, 2m, 2m) with I1 I2 = I3, each commuting with J.
    """

    J: np.ndarray
    I: Optional[np.ndarray] = None
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.validate()

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    @property
    def m(self) -> int:
        return self.dim // 2

    @property
    def has_triple(self) -> bool:
        return self.I is not None

    def validate(self) -> None:
        d = self.dim
        if self.J.shape != (d, d) or d % 2:
            raise UsageError(f"Complex structure must be square of even size, got {self.J.shape}")
        eye = np.eye(d)
        checks = {
            "J^2 = -id": self.J @ self.J + eye,
            "J g-skew": self.J + self.J.T,
        }
        if self.I is not None:
            I1, I2, I3 = self.I
            checks.update({
                "I1 I2 = I3": I1 @ I2 - I3,
                "I1 I2 = -I2 I1": I1 @ I2 + I2 @ I1,
                "[J, Ia] = 0": np.stack([self.J @ Ia - Ia @ self.J for Ia in self.I]),
            })
            for a, Ia in enumerate(self.I):
                checks[f"I{a+1}^2 = -id"] = Ia @ Ia + eye
                checks[f"I{a+1} g-skew"] = Ia + Ia.T
        for relation, residual in checks.items():
            r = max_abs(residual)
            if r > MODEL_TOL * 10 * d:
                raise ConstructionError(relation, r)

    def _require_triple(self) -> None:
        if self.I is None:
            raise UsageError("Model has no quaternionic triple")

    # -- distinguished forms

    @property
    def omega(self) -> np.ndarray:
        return form_of(self.J)

    @property
    def omegas(self) -> np.ndarray:
        self._require_triple()
        return form_of(self.I)

    @property
    def kraines(self) -> np.ndarray:
        if "kraines" not in self._cache:
            self._require_triple()
            self._cache["kraines"] = sum(wedge(w, w) for w in self.omegas)
        return self._cache["kraines"]

    @property
    def kraines_tilde(self) -> np.ndarray:
        if "kraines_tilde" not in self._cache:
            om = self.omega
            self._cache["kraines_tilde"] = wedge(om, om) + (self.m - 1) / 3.0 * self.kraines
        return self._cache["kraines_tilde"]

    def vee(self, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """v ^ w as a 2-form."""
        return np.outer(v, w) - np.outer(w, v)

    # -- projectors on 2-forms

    def j_twist(self, alpha: np.ndarray) -> np.ndarray:
        return pullback(self.J, alpha)

    def proj_omega(self, alpha: np.ndarray) -> np.ndarray:
        om = self.omega
        return inner(alpha, om) / self.m * om

    def proj_11(self, alpha: np.ndarray) -> np.ndarray:
        return 0.5 * (alpha + self.j_twist(alpha))

    def proj_11_0(self, alpha: np.ndarray) -> np.ndarray:
        return self.proj_11(alpha) - self.proj_omega(alpha)

    def proj_Q(self, alpha: np.ndarray) -> np.ndarray:
        oms = self.omegas
        coeffs = np.array([inner(alpha, w) for w in oms]) / self.m
        return np.tensordot(coeffs, oms, axes=(0, 0))

    def sp_part(self, S: np.ndarray) -> np.ndarray:
        """Part of an endomorphism commuting with the triple: (S - sum Ia S Ia) / 4."""
        return 0.25 * (S - self.C(S))

    def proj_E(self, alpha: np.ndarray) -> np.ndarray:
        self._require_triple()
        u = form_of(self.sp_part(endo_of(self.proj_11(alpha))))
        return u - self.proj_omega(alpha)

    def proj_F(self, alpha: np.ndarray) -> np.ndarray:
        a0 = self.proj_11_0(alpha)
        return a0 - self.proj_Q(a0) - self.proj_E(a0)

    # -- endomorphisms

    def C(self, h: np.ndarray) -> np.ndarray:
        self._require_triple()
        return sum(Ia @ h @ Ia for Ia in self.I)

    def sym_plus(self, h: np.ndarray) -> np.ndarray:
        return 0.5 * (h - self.J @ h @ self.J)

    def sym_minus(self, h: np.ndarray) -> np.ndarray:
        return 0.5 * (h + self.J @ h @ self.J)

    def iota(self, h: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        return derivation(h, alpha)

    def lower_omega(self, alpha: np.ndarray) -> np.ndarray:
        return lower_star(self.omega, alpha)

    # -- random elements

    def random_vector(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.dim)

    def random_sym(self, rng: np.random.Generator, traceless: bool = False) -> np.ndarray:
        M = rng.standard_normal((self.dim, self.dim))
        h = 0.5 * (M + M.T)
        if traceless:
            h = h - np.trace(h) / self.dim * np.eye(self.dim)
        return h

    def random_form2(self, rng: np.random.Generator) -> np.ndarray:
        M = rng.standard_normal((self.dim, self.dim))
        return 0.5 * (M - M.T)

    def random_primitive_11(self, rng: np.random.Generator) -> np.ndarray:
        return self.proj_11_0(self.random_form2(rng))

    def random_E_plus_Q(self, rng: np.random.Generator) -> np.ndarray:
        F = self.random_primitive_11(rng)
        return self.proj_E(F) + self.proj_Q(F)

    def random_anti(self, rng: np.random.Generator) -> np.ndarray:
        return self.sym_minus(self.random_sym(rng))

    @classmethod
    def flat(cls, m: int) -> "HermitianModel":
        if m < 1:
            raise UsageError(f"Complex dimension must be positive, got {m}")
        J = np.zeros((2 * m, 2 * m))
        J[m:, :m] = np.eye(m)
        J[:m, m:] = -np.eye(m)
        return cls(J=J)

    @classmethod
    def quaternionic(cls, n: int) -> "HermitianModel":
        """
        Model on C^{n x 2} with J(B) = -iB and Ia(B) = -B qa, I3 = I1 I2.

        Real coordinates are (Re B, Im B) flattened row-major; the metric is
        Re tr(B^H B'). This mirrors the isotropy action on the tangent space
        of the complex 2-plane Grassmannian.
        """
        if n < 1:
            raise UsageError(f"Quaternionic dimension must be positive, got {n}")
        d = 4 * n

        def to_real(B: np.ndarray) -> np.ndarray:
            return np.r_[B.real.ravel(), B.imag.ravel()]

        def from_real(x: np.ndarray) -> np.ndarray:
            return (x[: 2 * n] + 1j * x[2 * n:]).reshape(n, 2)

        def matrix(op) -> np.ndarray:
            return np.stack([to_real(op(from_real(e))) for e in np.eye(d)], axis=1)

        J = matrix(lambda B: -1j * B)
        I1 = matrix(lambda B: -B @ QUAT_UNITS[0])
        I2 = matrix(lambda B: -B @ QUAT_UNITS[1])
        return cls(J=J, I=np.stack([I1, I2, I1 @ I2]))
