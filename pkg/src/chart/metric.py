from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from src.chart.jet import Jet, einsum, jet_space
from src.core.errors import FixtureError, UsageError
from src.utils.calc_utils import max_abs

DET_FLOOR = 1e-10

_LABELS = "pqrstuvw"


@dataclass(frozen=True)
class Domain:
    kind: str  # "torus" or "ball"
    extent: float  # period, or radius

    def sample(self, dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "torus":
            return rng.uniform(0.0, self.extent, size=(count, dim))
        direction = rng.standard_normal((count, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = self.extent * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / dim)
        return direction * radius


class ChartMetric(ABC):
    """
    Riemannian metric on a coordinate chart, evaluated as jets.

    `einstein` is the declared Einstein constant, or None when it is to be
    read off the computed Ricci tensor.
    """

    name: str
    dim: int
    domain: Domain
    einstein: Optional[float] = None

    @abstractmethod
    def components(self, x: Jet) -> Jet:
        """g_ij as a (dim, dim) jet, given the coordinate jets."""

    def sample_points(self, count: int, seed: int) -> np.ndarray:
        return self.domain.sample(self.dim, count, np.random.default_rng(seed))

    def geometry(self, points: np.ndarray, order: int, t_order: int = 0) -> "Geometry":
        x = Jet.coordinates(jet_space(self.dim, order, t_order), points)
        return Geometry(self.components(x))


class Geometry:
    """
    Levi-Civita calculus of a metric jet at a batch of points.

    Curvature follows R(X,Y) = nabla^2_{Y,X} - nabla^2_{X,Y}, stored as
    curvature[b, c, f, a] = (R(d_b, d_c) d_f)^a, so Ric X = sum_i R(e_i, X) e_i
    is positive on the round sphere.
    """

    def __init__(self, metric: Jet) -> None:
        if metric.shape != (metric.space.dim, metric.space.dim):
            raise UsageError(f"Metric jet must have shape (dim, dim), got {metric.shape}")
        det = np.linalg.det(metric.value())
        bad = np.flatnonzero(~(det > DET_FLOOR))
        if bad.size:
            raise FixtureError(f"Degenerate metric at point {int(bad[0])}: det g = {det[bad[0]]:.3e}")
        self.g = metric
        self.space = metric.space
        self.dim = metric.space.dim

    @cached_property
    def ginv(self) -> Jet:
        return self.g.inverse()

    @cached_property
    def christoffel(self) -> Jet:
        """Gamma[k, i, j] = Gamma^k_ij."""
        dg = self.g.grad()
        # lowered[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
        lowered = dg.linear("ilj->lij") + dg.linear("jli->lij") - dg.linear("lij->lij")
        return einsum("kl,lij->kij", self.ginv, lowered) * 0.5

    @cached_property
    def curvature(self) -> Jet:
        gam = self.christoffel
        dgam = gam.grad()
        gg = einsum("abm,mcf->bcfa", gam, gam)
        std = dgam.linear("bacf->bcfa") - dgam.linear("cabf->bcfa") + gg - gg.linear("cbfa->bcfa")
        return -std

    @cached_property
    def ricci(self) -> Jet:
        """Ricci endomorphism Ric^a_b."""
        return einsum("cf,cbfa->ab", self.ginv, self.curvature)

    @cached_property
    def scalar(self) -> Jet:
        return self.ricci.linear("aa->")

    def nabla(self, tensor: Jet, kinds: str) -> Jet:
        """
        Covariant derivative with the direction on a new leading axis.

        `kinds` gives one letter per tensor axis, "u" for an upper and "d"
        for a lower index.
        """
        if len(kinds) != len(tensor.shape):
            raise UsageError(f"kinds {kinds!r} do not match tensor shape {tensor.shape}")
        labels = _LABELS[: len(kinds)]
        out = tensor.grad()
        for k, kind in enumerate(kinds):
            moved = labels[:k] + "c" + labels[k + 1:]
            if kind == "u":
                out = out + einsum(f"{labels[k]}ic,{moved}->i{labels}", self.christoffel, tensor)
            elif kind == "d":
                out = out - einsum(f"ci{labels[k]},{moved}->i{labels}", self.christoffel, tensor)
            else:
                raise UsageError(f"Unknown index kind {kind!r}")
        return out

    def lower(self, vector: Jet) -> Jet:
        return einsum("ab,b->a", self.g, vector)

    def raise_(self, form: Jet) -> Jet:
        return einsum("ab,b->a", self.ginv, form)

    def endomorphism(self, bilinear: Jet) -> Jet:
        """g^{-1} b for a bilinear form b."""
        return einsum("ac,cb->ab", self.ginv, bilinear)

    def bilinear(self, endo: Jet) -> Jet:
        return einsum("ac,cb->ab", self.g, endo)

    def frame_trace(self, tensor: Jet, subscripts: str) -> Jet:
        """Contract lower slots of `tensor` with g^{ij}, e.g. "ij,ijab->ab"."""
        return einsum(subscripts, self.ginv, tensor)


@dataclass(frozen=True)
class CurvatureData:
    christoffel: np.ndarray
    curvature: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray

    def einstein_residual(self, E: float) -> float:
        dim = self.ricci.shape[-1]
        return max_abs(self.ricci - E * np.eye(dim))

    def einstein_ratio(self) -> np.ndarray:
        return self.scalar / self.ricci.shape[-1]


def curvature_suite(metric: ChartMetric, points: np.ndarray) -> CurvatureData:
    geo = metric.geometry(points, order=2)
    return CurvatureData(
        christoffel=geo.christoffel.value(),
        curvature=geo.curvature.value(),
        ricci=geo.ricci.value(),
        scalar=geo.scalar.value(),
    )
