from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Any, List

import msgspec
import numpy as np

from src.core.errors import UsageError, MatrixFormatError
from src.utils.calc_utils import haar_unitary, max_abs

ENTRY_TOL = 1e-12
READ_TOL = 1e-9
MEMBER_TOL = 1e-9


def su_residuals(M: np.ndarray) -> Dict[str, float]:
    return {
        "anti_hermitian": max_abs(M.conj().T + M),
        "trace": float(abs(np.trace(M))),
    }


@dataclass(frozen=True)
class SuMatrix:
    """
    Element of su(n+2) in the complex matrix representation.

    Parameters
    ----------
    n : int
        Grassmann parameter, the matrix size is N = n + 2.

    entries : np.ndarray
        Complex N x N anti-Hermitian trace-free matrix. The array is checked
        and made read-only on construction.
    """

    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (self.N, self.N):
            raise UsageError(f"Expected {self.N}x{self.N} matrix for n={self.n}, got {arr.shape}")
        residuals = su_residuals(arr)
        # absolute on unit-sized entries, relative above
        bound = ENTRY_TOL * max(1.0, max_abs(arr))
        if any(v > bound for v in residuals.values()):
            raise UsageError(f"Matrix is not in su({self.N}): residuals {residuals}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def N(self) -> int:
        return self.n + 2

    def residuals(self) -> Dict[str, float]:
        return su_residuals(self.entries)

    def is_valid(self, tol: float = ENTRY_TOL) -> bool:
        return all(v < tol for v in self.residuals().values())

    def norm(self) -> float:
        return float(np.sqrt(trace_form(self, self)))

    def scaled(self, lam: float) -> "SuMatrix":
        return SuMatrix(self.n, lam * self.entries)

    def conjugated(self, g: np.ndarray) -> "SuMatrix":
        """Ad(g^-1) A = g^-1 A g for unitary g."""
        return SuMatrix(self.n, g.conj().T @ self.entries @ g)


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise UsageError(f"Grassmann parameter must be an integer >= 2, got {n}")

def _same_n(*mats: SuMatrix) -> int:
    ns = {m.n for m in mats}
    if len(ns) != 1:
        raise UsageError(f"Dimension mismatch: n values {sorted(ns)}")
    return ns.pop()

def project_su(M: np.ndarray) -> np.ndarray:
    """Anti-Hermitian trace-free part of a square complex matrix."""
    M = np.asarray(M, dtype=complex)
    A = 0.5 * (M - M.conj().T)
    return A - (np.trace(A) / A.shape[0]) * np.eye(A.shape[0])

def random_su(n: int, seed: int) -> SuMatrix:
    _check_n(n)
    rng = np.random.default_rng(seed)
    N = n + 2
    M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return SuMatrix(n, project_su(M))

def trace_form(A: SuMatrix, B: SuMatrix) -> float:
    _same_n(A, B)
    return float(-np.real(np.trace(A.entries @ B.entries)))

def bracket(A: SuMatrix, B: SuMatrix) -> SuMatrix:
    n = _same_n(A, B)
    return SuMatrix(n, project_su(A.entries @ B.entries - B.entries @ A.entries))

def cubic_p0(A: SuMatrix, B: SuMatrix, C: SuMatrix) -> float:
    """
    Invariant cubic form P0 on su(n+2).

    Computed as Re tr(i(ACB + CAB)), the complex form of the real-trace
    definition with the complex structure acting as multiplication by i. For
    anti-Hermitian inputs this equals -2 Im tr(ABC) and is symmetric in all
    three slots.
    """
    _same_n(A, B, C)
    a, b, c = A.entries, B.entries, C.entries
    return float(np.real(np.trace(1j * (a @ c @ b + c @ a @ b))))

def p0_tensor(basis: np.ndarray) -> np.ndarray:
    """P0 evaluated on all triples of a stacked basis (k, N, N) -> (k, k, k)."""
    abc = np.einsum("aij,bjk,cki->abc", basis, basis, basis)
    return -np.imag(abc + abc.transpose(0, 2, 1))

def hyperquadric_residual(A: SuMatrix) -> float:
    """Max-norm residual of A^2 - (tr A^2 / N) id for A normalized in Frobenius norm."""
    nrm = np.linalg.norm(A.entries)
    if nrm == 0.0:
        return 0.0
    a = A.entries / nrm
    a2 = a @ a
    return max_abs(a2 - (np.trace(a2) / A.N) * np.eye(A.N))

def hyperquadric_member(A: SuMatrix, tol: float = MEMBER_TOL) -> bool:
    return hyperquadric_residual(A) < tol

def hyperquadric_sample(n: int, seed: int) -> SuMatrix:
    _check_n(n)
    if n % 2:
        raise UsageError(
            f"No nonzero hyperquadric members for odd n={n}: members need eigenvalues "
            "+i and -i with equal multiplicities summing to n+2"
        )
    rng = np.random.default_rng(seed)
    N = n + 2
    p = N // 2
    U = haar_unitary(N, rng)
    D = np.diag(np.r_[np.ones(p), -np.ones(p)]).astype(complex)
    return SuMatrix(n, 1j * U @ D @ U.conj().T)

def vanc_odd_check(n: int, trials: int, seed: int) -> Dict[str, Any]:
    """
    Report on the emptiness of the nonzero hyperquadric for odd n.

    The algebraic part restates the eigenvalue argument: a member satisfies
    A^2 = -c id with c >= 0, so A has eigenvalues +-i sqrt(c) and trace zero
    forces equal multiplicities p = q, hence N = 2p is even. The empirical
    part draws `trials` random normalized matrices and counts members at
    tolerance 1e-6.
    """
    _check_n(n)
    if n % 2 == 0:
        raise UsageError(f"vanc_odd_check expects odd n, got {n}")
    N = n + 2
    mult_possible = [(p, N - p) for p in range(N + 1) if p == N - p]
    rng = np.random.default_rng(seed)
    members = 0
    min_residual = float("inf")
    for _ in range(trials):
        A = random_su(n, int(rng.integers(0, 2**63 - 1)))
        r = hyperquadric_residual(A.scaled(1.0 / A.norm()))
        min_residual = min(min_residual, r)
        if r < 1e-6:
            members += 1
    return {
        "n": n,
        "N": N,
        "algebraic_ok": len(mult_possible) == 0,
        "balanced_splits": mult_possible,
        "trials": trials,
        "members_found": members,
        "min_residual": None if trials == 0 else min_residual,
        "passed": len(mult_possible) == 0 and members == 0,
    }

@lru_cache(maxsize=None)
def _su_basis_cached(N: int) -> np.ndarray:
    mats: List[np.ndarray] = []
    s = 1.0 / np.sqrt(2.0)
    for j in range(N):
        for k in range(j + 1, N):
            m = np.zeros((N, N), dtype=complex)
            m[j, k], m[k, j] = 1.0, 1.0
            mats.append(1j * s * m)
            m = np.zeros((N, N), dtype=complex)
            m[j, k], m[k, j] = -1j, 1j
            mats.append(1j * s * m)
    for l in range(1, N):
        d = np.zeros(N)
        d[:l] = 1.0
        d[l] = -l
        d *= np.sqrt(2.0 / (l * (l + 1)))
        mats.append(1j * s * np.diag(d).astype(complex))
    arr = np.stack(mats)
    arr.setflags(write=False)
    return arr

def su_basis(n: int) -> np.ndarray:
    """
    Generalized Gell-Mann basis i*lambda/sqrt(2) of su(n+2), shape (N^2-1, N, N).

    Orthonormal for the trace form -Re tr(AB).
    """
    _check_n(n)
    return _su_basis_cached(n + 2)

def su_coords(A: SuMatrix) -> np.ndarray:
    basis = su_basis(A.n)
    return -np.real(np.einsum("kij,ji->k", basis, A.entries))

def from_coords(n: int, coords: np.ndarray) -> SuMatrix:
    return SuMatrix(n, np.tensordot(np.asarray(coords, dtype=float), su_basis(n), axes=(0, 0)))

def p0_zero_locus_residual(A: SuMatrix) -> float:
    """max_i |P0(A, A, B_i)| over the orthonormal basis, relative to |A|^3."""
    nrm = A.norm()
    if nrm == 0.0:
        return 0.0
    a = A.entries
    a2 = a @ a
    # P0(A, A, B) = -2 Im tr(A^2 B)
    vals = -2.0 * np.imag(np.einsum("ij,kji->k", a2, su_basis(A.n)))
    return max_abs(vals) / nrm**3


class MatrixFile(msgspec.Struct):
    n: int
    re: List[List[float]]
    im: List[List[float]]

_matrix_decoder = msgspec.json.Decoder(MatrixFile)
_matrix_encoder = msgspec.json.Encoder()

def matrix_from_json(raw: bytes) -> SuMatrix:
    try:
        doc = _matrix_decoder.decode(raw)
    except msgspec.DecodeError as e:
        raise MatrixFormatError(f"Malformed matrix JSON: {e}") from e
    if doc.n < 2:
        raise MatrixFormatError(f"Matrix file has n={doc.n}, need n >= 2")
    try:
        re = np.asarray(doc.re, dtype=float)
        im = np.asarray(doc.im, dtype=float)
    except ValueError as e:
        raise MatrixFormatError(f"Matrix rows must all have the same length: {e}") from e
    N = doc.n + 2
    if re.shape != (N, N) or im.shape != (N, N):
        raise MatrixFormatError(f"Matrix file shape {re.shape}/{im.shape} does not match N={N}")
    M = re + 1j * im
    residuals = su_residuals(M)
    if any(v >= READ_TOL for v in residuals.values()):
        raise MatrixFormatError(f"Matrix is not in su({N}): residuals {residuals}")
    if any(v > ENTRY_TOL for v in residuals.values()):
        M = project_su(M)
    return SuMatrix(doc.n, M)

def matrix_to_json(A: SuMatrix) -> bytes:
    return _matrix_encoder.encode(
        MatrixFile(n=A.n, re=np.real(A.entries).tolist(), im=np.imag(A.entries).tolist())
    )

def read_matrix(path: str) -> SuMatrix:
    try:
        with open(path, "rb") as file:
            raw = file.read()
    except OSError as e:
        raise MatrixFormatError(f"Cannot read matrix file {path}: {e}") from e
    return matrix_from_json(raw)

def write_matrix(A: SuMatrix, path: str) -> None:
    with open(path, "wb") as file:
        file.write(matrix_to_json(A))
