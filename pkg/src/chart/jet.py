from functools import lru_cache
from itertools import product
from math import factorial
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.core.errors import UsageError

Monomial = Tuple[Tuple[int, ...], int]


def _space_indices(dim: int, order: int) -> List[Tuple[int, ...]]:
    out = [a for a in product(range(order + 1), repeat=dim) if sum(a) <= order]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


class JetSpace:
    """
    Truncated Taylor coefficients in `dim` chart coordinates and one
    deformation parameter t.

    A monomial is (alpha, s) with |alpha| <= order and s <= t_order.
    Products are exact truncations; pairs contributing to a coefficient
    are stored sorted by target so a product is one gather, one
    elementwise einsum and one `np.add.reduceat`.
    """

    def __init__(self, dim: int, order: int, t_order: int = 0) -> None:
        if dim < 1 or order < 0 or t_order < 0:
            raise UsageError(f"Invalid jet space dim={dim} order={order} t_order={t_order}")
        self.dim = dim
        self.order = order
        self.t_order = t_order
        self.monomials: List[Monomial] = [
            (a, s) for s in range(t_order + 1) for a in _space_indices(dim, order)
        ]
        self.index: Dict[Monomial, int] = {mono: k for k, mono in enumerate(self.monomials)}
        self.size = len(self.monomials)
        self.const = self.index[((0,) * dim, 0)]

        pairs = []
        for i, (a, s) in enumerate(self.monomials):
            for j, (b, r) in enumerate(self.monomials):
                if sum(a) + sum(b) <= order and s + r <= t_order:
                    k = self.index[(tuple(x + y for x, y in zip(a, b)), s + r)]
                    pairs.append((k, i, j))
        pairs.sort()
        target = np.array([p[0] for p in pairs])
        self.left = np.array([p[1] for p in pairs])
        self.right = np.array([p[2] for p in pairs])
        self.starts = np.searchsorted(target, np.arange(self.size))

        self.deriv = []
        for i in range(dim):
            src, dst, fac = [], [], []
            for k, (a, s) in enumerate(self.monomials):
                if a[i] > 0:
                    lowered = tuple(x - (j == i) for j, x in enumerate(a))
                    src.append(k)
                    dst.append(self.index[(lowered, s)])
                    fac.append(float(a[i]))
            self.deriv.append((np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac)))

        self.space_degree = np.array([sum(a) for a, _ in self.monomials])
        self.t_degree = np.array([s for _, s in self.monomials])

    def __repr__(self) -> str:
        return f"JetSpace(dim={self.dim}, order={self.order}, t_order={self.t_order})"

    def product(self, subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        terms = np.einsum(f"...{sa}Z,...{sb}Z->...{out}Z", a[..., self.left], b[..., self.right], optimize=True)
        return np.add.reduceat(terms, self.starts, axis=-1)

    def taylor_factors(self, wavevectors: np.ndarray) -> np.ndarray:
        """(M, size) coefficients of exp(i k.delta) at each monomial, zero off t^0."""
        k = np.asarray(wavevectors, dtype=float)
        out = np.zeros((k.shape[0], self.size), dtype=complex)
        for idx, (a, s) in enumerate(self.monomials):
            if s:
                continue
            col = np.ones(k.shape[0], dtype=complex)
            for j, p in enumerate(a):
                if p:
                    col = col * (1j * k[:, j]) ** p / factorial(p)
            out[:, idx] = col
        return out


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int, t_order: int = 0) -> JetSpace:
    return JetSpace(dim, order, t_order)


class Jet:
    """
    Tensor of jets at a batch of points.

    `coeffs` has shape (P, *tensor_shape, space.size). `valid` is the
    spatial order up to which the coefficients are exact; every
    derivative lowers it by one.
    """

    __array_priority__ = 100

    def __init__(self, space: JetSpace, coeffs: np.ndarray, valid: int = None) -> None:
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.valid = space.order if valid is None else valid

    @classmethod
    def constant(cls, space: JetSpace, values: np.ndarray) -> "Jet":
        values = np.asarray(values, dtype=float)
        c = np.zeros(values.shape + (space.size,))
        c[..., space.const] = values
        return cls(space, c)

    @classmethod
    def coordinates(cls, space: JetSpace, points: np.ndarray) -> "Jet":
        """x_i = x0_i + delta_i, shape (P, dim)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        c = np.zeros(points.shape + (space.size,))
        c[..., space.const] = points
        for i in range(space.dim):
            unit = tuple(int(j == i) for j in range(space.dim))
            c[:, i, space.index[(unit, 0)]] = 1.0
        return cls(space, c)

    @classmethod
    def parameter(cls, space: JetSpace, batch: int) -> "Jet":
        """The deformation parameter t as a scalar jet."""
        if space.t_order < 1:
            raise UsageError("Jet space carries no t direction")
        c = np.zeros((batch, space.size))
        c[:, space.index[((0,) * space.dim, 1)]] = 1.0
        return cls(space, c)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape[1:-1]

    @property
    def batch(self) -> int:
        return self.coeffs.shape[0]

    def _like(self, coeffs: np.ndarray, valid: int) -> "Jet":
        return Jet(self.space, coeffs, valid)

    def _check(self, other: "Jet") -> None:
        if other.space is not self.space:
            raise UsageError(f"Jets from different spaces: {self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return self._like(self.coeffs + other.coeffs, min(self.valid, other.valid))
        return self + Jet.constant(self.space, np.broadcast_to(other, (self.batch,) + self.shape))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs, self.valid)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, Jet):
            raise UsageError("Use einsum for jet products")
        return self._like(self.coeffs * float(scalar), self.valid)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def linear(self, subscripts: str) -> "Jet":
        """Index manipulation that never mixes coefficients, e.g. 'ij->ji' or 'aa->'."""
        lhs, out = subscripts.split("->")
        return self._like(np.einsum(f"...{lhs}Z->...{out}Z", self.coeffs), self.valid)

    def with_constant(self, matrix: np.ndarray, subscripts: str) -> "Jet":
        """Contract with a point-independent array, e.g. a complex structure."""
        lhs, out = subscripts.split("->")
        sa, sb = lhs.split(",")
        return self._like(np.einsum(f"{sa},...{sb}Z->...{out}Z", matrix, self.coeffs), self.valid)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return self._like(self.coeffs[(slice(None),) + key], self.valid)

    def value(self) -> np.ndarray:
        if self.valid < 0:
            raise UsageError("Insufficient jet order: value requested after too many derivatives")
        return self.coeffs[..., self.space.const]

    def d(self, i: int) -> "Jet":
        src, dst, fac = self.space.deriv[i]
        out = np.zeros_like(self.coeffs)
        out[..., dst] = self.coeffs[..., src] * fac
        return self._like(out, self.valid - 1)

    def grad(self) -> "Jet":
        """Partial derivatives stacked on a new leading tensor axis."""
        parts = [self.d(i).coeffs for i in range(self.space.dim)]
        return self._like(np.stack(parts, axis=1), self.valid - 1)

    def t_coeff(self, s: int) -> "Jet":
        """Coefficient of t^s, i.e. (1/s!) d^s/dt^s at t = 0, as a jet with no t dependence."""
        sp = self.space
        out = np.zeros_like(self.coeffs)
        for (a, r), k in sp.index.items():
            if r == 0 and (a, s) in sp.index:
                out[..., k] = self.coeffs[..., sp.index[(a, s)]]
        return self._like(out, self.valid)

    def t_derivative(self, s: int) -> "Jet":
        return self.t_coeff(s) * factorial(s)

    def nilpotent(self) -> "Jet":
        out = self.coeffs.copy()
        out[..., self.space.const] = 0.0
        return self._like(out, self.valid)

    def power(self, p: float) -> "Jet":
        """Scalar jet raised to a real power by the binomial series around its value."""
        if self.shape:
            raise UsageError("power is defined for scalar jets")
        c0 = self.coeffs[..., self.space.const]
        if np.any(c0 <= 0) and not float(p).is_integer():
            raise UsageError("Non-integer power of a jet with non-positive value")
        ratio = self._like(self.nilpotent().coeffs / c0[:, None], self.valid)
        total = Jet.constant(self.space, np.ones_like(c0))
        term = total
        coef = 1.0
        for k in range(1, self.space.order + self.space.t_order + 1):
            coef *= (p - k + 1) / k
            term = einsum(",->", term, ratio)
            total = total + term * coef
        return total._like(total.coeffs * (c0 ** p)[:, None], self.valid)

    def inverse(self) -> "Jet":
        """Matrix inverse of a (dim, dim) jet by the Neumann series around its value."""
        if len(self.shape) != 2 or self.shape[0] != self.shape[1]:
            raise UsageError(f"inverse needs a square matrix jet, got shape {self.shape}")
        inv0 = np.linalg.inv(self.coeffs[..., self.space.const])
        base = Jet.constant(self.space, inv0)
        step = -einsum("ab,bc->ac", base, self.nilpotent())
        total = base
        term = base
        for _ in range(self.space.order + self.space.t_order):
            term = einsum("ab,bc->ac", step, term)
            total = total + term
        return total._like(total.coeffs, self.valid)


def einsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Tensor contraction of two jets with the truncated product on coefficients."""
    a._check(b)
    return Jet(a.space, a.space.product(subscripts, a.coeffs, b.coeffs), min(a.valid, b.valid))


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    """Stack jets along a new tensor axis."""
    first = jets[0]
    coeffs = np.stack([j.coeffs for j in jets], axis=axis + 1)
    return Jet(first.space, coeffs, min(j.valid for j in jets))
