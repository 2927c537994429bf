from typing import Callable, Dict, Optional

import numpy as np

from src.chart.jet import Jet, einsum, stack
from src.chart.metric import ChartMetric, Domain, curvature_suite
from src.core.errors import FixtureError, UsageError
from src.utils.calc_utils import max_abs

EINSTEIN_TOL = 1e-9
VALIDATION_POINTS = 20
KAEHLER_TOL = 1e-10


def _scalar_times_identity(f: Jet, dim: int) -> Jet:
    eye = Jet.constant(f.space, np.broadcast_to(np.eye(dim), (f.batch, dim, dim)))
    return einsum(",ab->ab", f, eye)


def _squared_radius(x: Jet) -> Jet:
    return einsum("a,a->", x, x)


class FlatTorus(ChartMetric):
    def __init__(self, dim: int = 3, period: float = 2.0 * np.pi) -> None:
        self.name = f"torus{dim}"
        self.dim = dim
        self.domain = Domain("torus", period)
        self.einstein = 0.0

    def components(self, x: Jet) -> Jet:
        return Jet.constant(x.space, np.broadcast_to(np.eye(self.dim), (x.batch, self.dim, self.dim)))


class StereographicSphere(ChartMetric):
    """Unit round sphere in stereographic coordinates, g = 4 delta / (1 + |x|^2)^2."""

    def __init__(self, dim: int = 3, radius: float = 1.5) -> None:
        self.name = f"sphere{dim}"
        self.dim = dim
        self.domain = Domain("ball", radius)
        self.einstein = float(dim - 1)

    def components(self, x: Jet) -> Jet:
        conformal = (_squared_radius(x) + 1.0).power(-2.0) * 4.0
        return _scalar_times_identity(conformal, self.dim)


class FubiniStudy(ChartMetric):
    """
    Fubini-Study metric of CP^k in the affine chart, from the potential
    log(1 + |z|^2).

    Real coordinates are ordered (x_1..x_k, y_1..y_k) with z = x + iy, and
    g(u, v) = Re sum_ab H_ab u_a conj(v_b), H_ab = d_a d_bbar log(1 + |z|^2).
    The complex structure is the constant matrix [[0, -1], [1, 0]].
    """

    def __init__(self, k: int = 2, radius: float = 1.0) -> None:
        self.name = f"cp{k}"
        self.k = k
        self.dim = 2 * k
        self.domain = Domain("ball", radius)
        self.einstein = None

    @property
    def complex_structure(self) -> np.ndarray:
        k = self.k
        J = np.zeros((2 * k, 2 * k))
        J[k:, :k] = np.eye(k)
        J[:k, k:] = -np.eye(k)
        return J

    def components(self, x: Jet) -> Jet:
        k = self.k
        s = (_squared_radius(x) + 1.0).power(-1.0)
        s2 = einsum(",->", s, s)
        re, im = x[:k], x[k:]
        # conj(z_a) z_b = (x_a x_b + y_a y_b) + i (x_a y_b - y_a x_b)
        zz_re = einsum("a,b->ab", re, re) + einsum("a,b->ab", im, im)
        zz_im = einsum("a,b->ab", re, im) - einsum("a,b->ab", im, re)
        h_re = _scalar_times_identity(s, k) - einsum(",ab->ab", s2, zz_re)
        h_im = -einsum(",ab->ab", s2, zz_im)
        top = stack([h_re, h_im], axis=1)
        bottom = stack([-h_im, h_re], axis=1)
        # blocks (P, k, 2, k) -> (P, 2k, 2k)
        rows = stack([top, bottom], axis=0)
        c = rows.coeffs  # (P, 2, k, 2, k, J)
        c = c.reshape(c.shape[0], 2 * k, 2 * k, c.shape[-1])
        return Jet(x.space, c, rows.valid)


FIXTURES: Dict[str, Callable[[], ChartMetric]] = {
    "torus3": lambda: FlatTorus(3),
    "sphere3": lambda: StereographicSphere(3),
    "cp2": lambda: FubiniStudy(2),
}


def fixture(name: str) -> ChartMetric:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise UsageError(f"Unknown fixture {name!r}, expected one of {sorted(FIXTURES)}") from None


def validate_einstein(metric: ChartMetric, points: int = VALIDATION_POINTS, seed: int = 0,
                      tol: float = EINSTEIN_TOL) -> float:
    """
    Einstein constant of `metric`, checked at random points.

    A declared constant must match Ric = E g, an undeclared one is the
    pointwise ratio scal / dim which must be the same everywhere.
    """
    data = curvature_suite(metric, metric.sample_points(points, seed))
    E: Optional[float] = metric.einstein
    if E is None:
        ratios = data.einstein_ratio()
        E = float(np.mean(ratios))
        if max_abs(ratios - E) > tol * max(1.0, abs(E)):
            raise FixtureError(f"{metric.name}: Einstein ratio varies by {max_abs(ratios - E):.3e}")
    residual = data.einstein_residual(E)
    if residual > tol * max(1.0, abs(E)):
        raise FixtureError(f"{metric.name}: |Ric - E g| = {residual:.3e} for E = {E}")
    return E


def parallel_complex_structure_residual(metric: FubiniStudy, points: np.ndarray) -> float:
    geo = metric.geometry(points, order=1)
    J = Jet.constant(geo.space, np.broadcast_to(metric.complex_structure, (geo.g.batch, metric.dim, metric.dim)))
    return max_abs(geo.nabla(J, "ud").value())


def check_kaehler(metric: FubiniStudy, points: np.ndarray, tol: float = KAEHLER_TOL) -> float:
    residual = parallel_complex_structure_residual(metric, points)
    if residual > tol:
        raise FixtureError(f"{metric.name}: |nabla J| = {residual:.3e} exceeds {tol:.1e}")
    return residual
