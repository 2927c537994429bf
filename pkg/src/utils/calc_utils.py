import numpy as np
from typing import Optional

from src.core.errors import UsageError


def max_abs(val) -> float:
    arr = np.asarray(val)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))

def rel_residual(lhs, rhs, floor: float = 1e-300) -> float:
    """
    Max-abs difference scaled by the larger of the two sides.

    Parameters
    ----------
    lhs, rhs : array_like
        The two sides of an identity.

    floor : float
        Lower bound on the scale, so two vanishing sides give 0 rather than nan.

    Returns
    -------
    float
        max|lhs - rhs| / max(max|lhs|, max|rhs|, floor).
    """
    scale = max(max_abs(lhs), max_abs(rhs), floor)
    return max_abs(np.asarray(lhs) - np.asarray(rhs)) / scale

def pairwise_sum(values: np.ndarray) -> float:
    # numpy reduces contiguous float arrays pairwise; fixed order keeps results bit-stable
    return float(np.sum(np.ascontiguousarray(values, dtype=np.float64)))

def haar_unitary(dim: int, rng: np.random.Generator, special: bool = True) -> np.ndarray:
    """
    Haar-random unitary from the QR decomposition of a complex Ginibre matrix.

    The columns of Q are rescaled by the phases of diag(R), which makes the
    distribution exactly Haar. With `special` the determinant phase is removed
    so the result lies in SU(dim).
    """
    if dim < 1:
        raise UsageError(f"Invalid unitary dimension: {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))[None, :]
    if special:
        phase = np.linalg.det(q)
        q = q * phase.conjugate() ** (1.0 / dim)
    return q

def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) < tol

def lstsq_scale(x: np.ndarray, y: np.ndarray, w: Optional[np.ndarray] = None):
    """
    Weighted least-squares fit of y = c x through the origin.

    Returns
    -------
    tuple
        (c, residual vector y - c x). c is nan when x is numerically zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    denom = float(np.sum(w * x * x))
    if denom <= 1e-300:
        return float("nan"), y.copy()
    c = float(np.sum(w * x * y)) / denom
    return c, y - c * x
