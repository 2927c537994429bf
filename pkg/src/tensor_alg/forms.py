from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from src.core.errors import UsageError

# the obstruction integrand pairs 5-forms
MAX_FORM_DEGREE = 5


def _check_degree(k: int) -> None:
    if k < 0 or k > MAX_FORM_DEGREE:
        raise UsageError(f"Form degree {k} outside supported range 0..{MAX_FORM_DEGREE}")

def degree(alpha: np.ndarray, batch: int = 0) -> int:
    return np.ndim(alpha) - batch

@lru_cache(maxsize=None)
def index_sets(dim: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    _check_degree(k)
    return tuple(combinations(range(dim), k))

@lru_cache(maxsize=None)
def _index_lookup(dim: int, k: int) -> Dict[Tuple[int, ...], int]:
    return {I: pos for pos, I in enumerate(index_sets(dim, k))}

def _perm_sign(seq: List[int]) -> int:
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign

@lru_cache(maxsize=None)
def _expand_plan(dim: int, k: int):
    """Flat positions and signs of every permutation of every increasing index set."""
    sets = index_sets(dim, k)
    perms = list(permutations(range(k)))
    signs = np.array([_perm_sign(list(p)) for p in perms], dtype=float)
    strides = np.array([dim ** (k - 1 - a) for a in range(k)], dtype=np.int64)
    if not sets:
        return np.zeros((0, len(perms)), dtype=np.int64), signs
    idx = np.array(sets, dtype=np.int64)
    flat = np.stack([idx[:, list(p)] @ strides for p in perms], axis=1)
    return flat, signs

def compress(alpha: np.ndarray, k: int) -> np.ndarray:
    """
    Coefficients on the orthonormal basis e^I, I increasing.

    Accepts leading batch axes: alpha has shape (..., dim, ..., dim) with k
    trailing form axes.
    """
    _check_degree(k)
    alpha = np.asarray(alpha)
    if k == 0:
        return alpha[..., None]
    dim = alpha.shape[-1]
    sets = index_sets(dim, k)
    idx = tuple(np.array([I[a] for I in sets], dtype=np.int64) for a in range(k))
    return alpha[(Ellipsis, *idx)]

def expand(coeffs: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Inverse of `compress`: full antisymmetric array from basis coefficients."""
    _check_degree(k)
    coeffs = np.asarray(coeffs)
    if k == 0:
        return coeffs[..., 0]
    batch = coeffs.shape[:-1]
    flat, signs = _expand_plan(dim, k)
    out = np.zeros(batch + (dim ** k,), dtype=coeffs.dtype)
    for p in range(flat.shape[1]):
        out[..., flat[:, p]] = signs[p] * coeffs
    return out.reshape(batch + (dim,) * k)

def basis_form(dim: int, I: Tuple[int, ...]) -> np.ndarray:
    k = len(I)
    c = np.zeros(comb(dim, k))
    order = sorted(I)
    c[_index_lookup(dim, k)[tuple(order)]] = _perm_sign([I.index(i) for i in order])
    return expand(c, dim, k)

def antisymmetrize(T: np.ndarray) -> np.ndarray:
    k = np.ndim(T)
    out = np.zeros_like(T)
    for p in permutations(range(k)):
        out = out + _perm_sign(list(p)) * np.transpose(T, p)
    return out / factorial(k)

def is_antisymmetric(alpha: np.ndarray, tol: float = 1e-12) -> bool:
    return float(np.max(np.abs(alpha - antisymmetrize(alpha)), initial=0.0)) < tol

def inner(alpha: np.ndarray, beta: np.ndarray, k: int = None) -> np.ndarray:
    """Form inner product making the e^I orthonormal; batch axes broadcast."""
    k = np.ndim(alpha) if k is None else k
    axes = tuple(range(-k, 0))
    return np.sum(alpha * beta, axis=axes) / factorial(k)

def norm2(alpha: np.ndarray, k: int = None) -> np.ndarray:
    return inner(alpha, alpha, k)

@lru_cache(maxsize=None)
def wedge_table(dim: int, k: int, l: int) -> sp.csr_matrix:
    """
    Sparse bilinear table S with (a (x) b) @ S = a ^ b on compressed coefficients.

    Row index is i * C(dim, l) + j for the i-th k-set and j-th l-set.
    """
    _check_degree(k + l)
    left, right = index_sets(dim, k), index_sets(dim, l)
    lookup = _index_lookup(dim, k + l)
    rows, cols, vals = [], [], []
    nr = len(right)
    for i, I in enumerate(left):
        sI = set(I)
        for j, J in enumerate(right):
            if sI.intersection(J):
                continue
            seq = list(I) + list(J)
            rows.append(i * nr + j)
            cols.append(lookup[tuple(sorted(seq))])
            vals.append(_perm_sign(seq))
    shape = (len(left) * nr, comb(dim, k + l))
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)

def wedge_compressed(a: np.ndarray, b: np.ndarray, dim: int, k: int, l: int) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    outer = (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)
    S = wedge_table(dim, k, l)
    return np.asarray((S.T @ outer.T).T)

def wedge(alpha: np.ndarray, beta: np.ndarray, batch: int = 0) -> np.ndarray:
    k = np.ndim(alpha) - batch
    l = np.ndim(beta) - batch
    dim = np.shape(alpha)[-1] if k else np.shape(beta)[-1]
    if k == 0:
        return alpha[(Ellipsis,) + (None,) * l] * beta
    if l == 0:
        return alpha * beta[(Ellipsis,) + (None,) * k]
    bshape = np.shape(alpha)[:batch]
    a = compress(alpha, k).reshape(-1, comb(dim, k))
    b = compress(beta, l).reshape(-1, comb(dim, l))
    c = wedge_compressed(a, b, dim, k, l)
    return expand(c.reshape(bshape + (c.shape[-1],)), dim, k + l)

def wedge_coefficients(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Compressed coefficients of alpha ^ beta; pairing two of these with a dot is the form inner product."""
    k, l = np.ndim(alpha), np.ndim(beta)
    dim = np.shape(alpha)[-1]
    return wedge_compressed(compress(alpha, k), compress(beta, l), dim, k, l)[0]

def interior(v: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """v _| alpha for a single vector and a single form."""
    return np.tensordot(v, alpha, axes=(0, 0))

def pullback(M: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """(M* alpha)(v1, ..., vk) = alpha(M v1, ..., M vk)."""
    out = alpha
    for p in range(np.ndim(alpha)):
        out = np.moveaxis(np.tensordot(out, M, axes=([p], [0])), -1, p)
    return out

def derivation(M: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """
    Extension of an endomorphism as a derivation: sum over slots of
    alpha(v1, ..., M vp, ..., vk). For symmetric M this is iota_M, and on the
    form slots of a vector-valued form it is the sharp action M # alpha.
    """
    k = np.ndim(alpha)
    out = np.zeros_like(alpha, dtype=np.result_type(alpha, M))
    for p in range(k):
        out = out + np.moveaxis(np.tensordot(alpha, M, axes=([p], [0])), -1, p)
    return out

def lower_star(F: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Adjoint of exterior multiplication by the 2-form F: 1/2 sum F(ei,ej) ej _| ei _| alpha."""
    if np.ndim(alpha) < 2:
        raise UsageError("Adjoint of a 2-form needs degree >= 2")
    return 0.5 * np.tensordot(F, alpha, axes=([0, 1], [0, 1]))

def form_of(M: np.ndarray) -> np.ndarray:
    """2-tensor (u, v) -> g(Mu, v) of an endomorphism in an orthonormal frame."""
    return np.swapaxes(M, -1, -2)

def endo_of(F: np.ndarray) -> np.ndarray:
    return np.swapaxes(F, -1, -2)

def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a
