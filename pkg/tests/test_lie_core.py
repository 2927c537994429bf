import msgspec
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import UsageError, MatrixFormatError
from src.lie_core import (
    SuMatrix, random_su, trace_form, bracket, cubic_p0, p0_tensor, su_basis, su_coords, from_coords,
    hyperquadric_member, hyperquadric_residual, hyperquadric_sample, vanc_odd_check,
    p0_zero_locus_residual, matrix_from_json, matrix_to_json,
)
from src.utils.calc_utils import haar_unitary


def diag_su(n, values):
    return SuMatrix(n, np.diag(1j * np.asarray(values, dtype=float)))


def test_random_su_is_valid_and_deterministic():
    A = random_su(2, 7)
    B = random_su(2, 7)
    assert A.is_valid()
    assert np.array_equal(A.entries, B.entries)
    assert random_su(3, 1).entries.shape == (5, 5)


def test_random_su_rejects_small_n():
    with pytest.raises(UsageError):
        random_su(1, 0)


def test_entries_are_read_only():
    A = random_su(2, 0)
    with pytest.raises(ValueError):
        A.entries[0, 0] = 1.0


def test_trace_form_diagonal_value():
    assert trace_form(diag_su(2, [1, -1, 0, 0]), diag_su(2, [1, -1, 0, 0])) == pytest.approx(2.0)


def test_trace_form_dimension_mismatch():
    with pytest.raises(UsageError):
        trace_form(random_su(2, 0), random_su(3, 0))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([2, 3, 4]))
def test_trace_form_ad_invariant(seed, n):
    A, B, C = (random_su(n, seed + k) for k in range(3))
    assert trace_form(A, B) == pytest.approx(trace_form(B, A))
    assert abs(trace_form(bracket(C, A), B) + trace_form(A, bracket(C, B))) < 1e-10


def test_cubic_diagonal_formula():
    # P0(A, A, A) = 2 sum a_j^3 for A = diag(i a_j)
    A = diag_su(2, [3, -1, -1, -1])
    assert cubic_p0(A, A, A) == pytest.approx(48.0)
    B = diag_su(2, [1, 1, -1, -1])
    assert abs(cubic_p0(B, B, B)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([2, 3]))
def test_cubic_symmetric_and_invariant(seed, n):
    A, B, C, X = (random_su(n, seed + k) for k in range(4))
    ref = cubic_p0(A, B, C)
    for perm in [(B, A, C), (A, C, B), (C, B, A), (B, C, A), (C, A, B)]:
        assert abs(cubic_p0(*perm) - ref) < 1e-11 * max(1.0, abs(ref))
    inv = cubic_p0(bracket(X, A), B, C) + cubic_p0(A, bracket(X, B), C) + cubic_p0(A, B, bracket(X, C))
    assert abs(inv) < 1e-9


def test_p0_tensor_matches_pointwise():
    basis = su_basis(2)
    T = p0_tensor(basis)
    mats = [SuMatrix(2, b) for b in basis]
    for a, b, c in [(0, 1, 2), (3, 3, 14), (5, 9, 12)]:
        assert T[a, b, c] == pytest.approx(cubic_p0(mats[a], mats[b], mats[c]), abs=1e-12)


def test_basis_is_orthonormal_and_coords_invert():
    basis = su_basis(3)
    gram = -np.real(np.einsum("aij,bji->ab", basis, basis))
    np.testing.assert_allclose(gram, np.eye(24), atol=1e-13)
    A = random_su(3, 5)
    np.testing.assert_allclose(from_coords(3, su_coords(A)).entries, A.entries, atol=1e-12)


def test_hyperquadric_membership_examples():
    assert hyperquadric_member(diag_su(2, [1, 1, -1, -1]))
    assert hyperquadric_member(SuMatrix(2, np.zeros((4, 4))))
    assert not hyperquadric_member(diag_su(2, [2, -1, -1, 0]))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), lam=st.floats(0.01, 100.0))
def test_hyperquadric_scale_invariant(seed, lam):
    A = hyperquadric_sample(2, seed)
    assert hyperquadric_member(A.scaled(lam))
    B = random_su(2, seed)
    assert hyperquadric_member(B) == hyperquadric_member(B.scaled(lam))


@pytest.mark.parametrize("n", [2, 4])
def test_hyperquadric_sample_members(n):
    A = hyperquadric_sample(n, 3)
    assert A.entries.shape == (n + 2, n + 2)
    assert hyperquadric_residual(A) < 1e-12
    assert A.is_valid()


def test_hyperquadric_sample_odd_n():
    with pytest.raises(UsageError):
        hyperquadric_sample(3, 0)


@pytest.mark.parametrize("n", [3, 5])
def test_vanc_odd_check(n):
    report = vanc_odd_check(n, 1000, 0)
    assert report["algebraic_ok"]
    assert report["members_found"] == 0
    assert report["passed"]


def test_vanc_odd_check_vacuous():
    report = vanc_odd_check(3, 0, 0)
    assert report["passed"] and report["min_residual"] is None


def test_zero_locus_matches_hyperquadric():
    for seed in range(5):
        A = hyperquadric_sample(2, seed)
        assert p0_zero_locus_residual(A) < 1e-10
    for seed in range(100):
        B = random_su(2, seed)
        assert p0_zero_locus_residual(B) > 1e-3


def test_matrix_json_roundtrip_and_rejects():
    A = random_su(2, 11)
    assert np.array_equal(matrix_from_json(matrix_to_json(A)).entries, A.entries)
    with pytest.raises(MatrixFormatError):
        matrix_from_json(b'{"n": 2, "re": [[1.0]], "im": [[0.0]]}')
    with pytest.raises(MatrixFormatError):
        matrix_from_json(b"not json")
    bad = {"n": 2, "re": np.eye(4).tolist(), "im": np.zeros((4, 4)).tolist()}
    with pytest.raises(MatrixFormatError):
        matrix_from_json(msgspec.json.encode(bad))


@pytest.mark.parametrize("entries", [
    np.eye(4),
    np.diag(1j * np.ones(4)),
    np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], dtype=complex),
])
def test_construction_rejects_matrices_outside_su(entries):
    with pytest.raises(UsageError):
        SuMatrix(2, entries)


def test_construction_keeps_operations_inside_su():
    A, B = random_su(3, 2), random_su(3, 3)
    assert bracket(A, B).is_valid()
    assert A.scaled(1e6).is_valid(1e-12 * 1e6)
    assert A.conjugated(haar_unitary(5, np.random.default_rng(0))).is_valid()
    assert trace_form(A, A) > 0


def test_matrix_json_rejects_ragged_rows():
    ragged = {"n": 2, "re": [[0.0] * 4, [0.0] * 3, [0.0] * 4, [0.0] * 4], "im": np.zeros((4, 4)).tolist()}
    with pytest.raises(MatrixFormatError):
        matrix_from_json(msgspec.json.encode(ragged))


def test_matrix_json_projects_read_noise():
    A = random_su(2, 5)
    noisy = {"n": 2, "re": (np.real(A.entries) + 1e-11).tolist(), "im": np.imag(A.entries).tolist()}
    B = matrix_from_json(msgspec.json.encode(noisy))
    assert B.is_valid()
    assert np.max(np.abs(B.entries - A.entries)) < 1e-10
