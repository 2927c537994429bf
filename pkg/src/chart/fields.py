from dataclasses import dataclass
from itertools import product
from typing import List, Tuple

import msgspec
import numpy as np

from src.chart.jet import Jet, JetSpace
from src.core.errors import UsageError

KINDS = ("scalar", "vector", "form", "symmetric")


class FieldRecord(msgspec.Struct, frozen=True):
    """JSON form of a trigonometric field: one [k, re, im] row per wave vector."""

    kind: str
    dim: int
    band: int
    terms: List[Tuple[List[int], List[float], List[float]]]


def wavevectors(dim: int, band: int) -> np.ndarray:
    """All integer k with max |k_j| <= band."""
    return np.array(list(product(range(-band, band + 1), repeat=dim)), dtype=int).reshape(-1, dim)


def _shape(kind: str, dim: int) -> Tuple[int, ...]:
    if kind not in KINDS:
        raise UsageError(f"Unknown field kind {kind!r}, expected one of {KINDS}")
    return {"scalar": (), "vector": (dim,), "form": (dim,), "symmetric": (dim, dim)}[kind]


@dataclass(frozen=True)
class TrigField:
    """
    Real field Re sum_k c_k exp(i k.x) on a 2 pi periodic chart.

    `coeffs` has shape (M, *tensor_shape) for the M rows of `wavevectors`.
    A "symmetric" field is a symmetric bilinear form; "vector" and "form"
    are components of a vector field and of a 1-form.
    """

    kind: str
    wavevectors: np.ndarray
    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.wavevectors.shape[1]

    @property
    def band(self) -> int:
        nonzero = np.any(np.abs(self.coeffs.reshape(len(self.coeffs), -1)) > 0, axis=1)
        if not nonzero.any():
            return 0
        return int(np.max(np.abs(self.wavevectors[nonzero])))

    def jet(self, space: JetSpace, points: np.ndarray) -> Jet:
        if space.dim != self.dim:
            raise UsageError(f"Field of dimension {self.dim} evaluated on a {space.dim}-dimensional chart")
        points = np.atleast_2d(points)
        phases = np.exp(1j * points @ self.wavevectors.T)  # (P, M)
        factors = space.taylor_factors(self.wavevectors)  # (M, J)
        c = np.einsum("pm,m...,mj->p...j", phases, self.coeffs, factors, optimize=True)
        return Jet(space, c.real)

    def values(self, points: np.ndarray) -> np.ndarray:
        phases = np.exp(1j * np.atleast_2d(points) @ self.wavevectors.T)
        return np.einsum("pm,m...->p...", phases, self.coeffs).real

    def scaled(self, factor: float) -> "TrigField":
        return TrigField(self.kind, self.wavevectors, self.coeffs * factor)

    def __add__(self, other: "TrigField") -> "TrigField":
        if other.kind != self.kind or not np.array_equal(other.wavevectors, self.wavevectors):
            raise UsageError("Fields on different wave-vector sets cannot be added")
        return TrigField(self.kind, self.wavevectors, self.coeffs + other.coeffs)

    def to_record(self) -> FieldRecord:
        terms = []
        for k, c in zip(self.wavevectors, self.coeffs):
            if np.any(c != 0):
                terms.append(([int(v) for v in k], np.ravel(c.real).tolist(), np.ravel(c.imag).tolist()))
        return FieldRecord(kind=self.kind, dim=self.dim, band=self.band, terms=terms)

    def to_json(self) -> bytes:
        return msgspec.json.encode(self.to_record())

    @classmethod
    def from_json(cls, raw: bytes) -> "TrigField":
        rec = msgspec.json.decode(raw, type=FieldRecord)
        shape = _shape(rec.kind, rec.dim)
        ks = wavevectors(rec.dim, rec.band)
        coeffs = np.zeros((len(ks),) + shape, dtype=complex)
        lookup = {tuple(k): i for i, k in enumerate(ks)}
        for k, re, im in rec.terms:
            if tuple(k) not in lookup:
                raise UsageError(f"Wave vector {k} exceeds the declared band {rec.band}")
            coeffs[lookup[tuple(k)]] = (np.asarray(re) + 1j * np.asarray(im)).reshape(shape)
        return cls(rec.kind, ks, coeffs)


def random_field(kind: str, dim: int, band: int, seed: int, scale: float = 1.0) -> TrigField:
    """Random field with complex Gaussian coefficients decaying like 1 / (1 + |k|^2)."""
    shape = _shape(kind, dim)
    ks = wavevectors(dim, band)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((len(ks),) + shape) + 1j * rng.standard_normal((len(ks),) + shape)
    if kind == "symmetric":
        c = 0.5 * (c + np.swapaxes(c, -1, -2))
    decay = 1.0 / (1.0 + np.sum(ks * ks, axis=1))
    c = c * decay.reshape((-1,) + (1,) * len(shape)) * scale / len(ks) ** 0.5
    return TrigField(kind, ks, c)


def constant_field(kind: str, dim: int, value) -> TrigField:
    value = np.broadcast_to(np.asarray(value, dtype=float), _shape(kind, dim))
    ks = np.zeros((1, dim), dtype=int)
    return TrigField(kind, ks, value[None].astype(complex))


def divergence_free(field: TrigField) -> TrigField:
    """
    Project a symmetric field onto the flat divergence-free ones.

    Each Fourier coefficient is conjugated with P(k) = 1 - k k^T / |k|^2,
    which keeps it symmetric and makes c_k k = 0.
    """
    if field.kind != "symmetric":
        raise UsageError("Divergence-free projection applies to symmetric fields")
    ks = field.wavevectors.astype(float)
    out = field.coeffs.copy()
    for i, k in enumerate(ks):
        kk = k @ k
        if kk == 0:
            continue
        P = np.eye(len(k)) - np.outer(k, k) / kk
        out[i] = P @ out[i] @ P
    return TrigField(field.kind, field.wavevectors, out)


def flat_divergence(field: TrigField, points: np.ndarray) -> np.ndarray:
    """sum_j d_j h_aj at `points`, straight from the Fourier coefficients."""
    phases = np.exp(1j * np.atleast_2d(points) @ field.wavevectors.T)
    ck = np.einsum("maj,mj->ma", field.coeffs, 1j * field.wavevectors)
    return np.einsum("pm,ma->pa", phases, ck).real
