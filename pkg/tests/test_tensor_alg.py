import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import ConstructionError, UsageError
from src.core.events import Status
from src.tensor_alg.forms import (
    basis_form, compress, expand, inner, interior, lower_star, wedge, antisymmetrize, is_antisymmetric,
    MAX_FORM_DEGREE, index_sets,
)
from src.tensor_alg.hermitian import HermitianModel
from src.tensor_alg.checks import (
    algebra_primitives, check_ls, check_kraines, check_quadratic_identities, check_dim3_wedge,
    check_anti_type, random_sp_sym, random_j_sym,
)

TOL = 1e-10


def all_pass(results):
    bad = [(r.name, r.residual, r.detail) for r in results if r.status is not Status.PASS]
    assert not bad, bad


def test_wedge_of_basis_forms():
    e12 = basis_form(4, (0, 1))
    e3 = basis_form(4, (2,))
    e123 = basis_form(4, (0, 1, 2))
    np.testing.assert_allclose(wedge(e12, e3), e123)
    np.testing.assert_allclose(wedge(e3, e12), e123)
    assert inner(e123, e123) == pytest.approx(1.0)
    np.testing.assert_allclose(basis_form(4, (1, 0)), -e12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_wedge_graded_commutative_and_associative(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(6)
    b = antisymmetrize(rng.standard_normal((6, 6)))
    c = antisymmetrize(rng.standard_normal((6, 6)))
    np.testing.assert_allclose(wedge(a, b), wedge(b, a), atol=1e-12)
    np.testing.assert_allclose(wedge(b, c), wedge(c, b), atol=1e-12)
    np.testing.assert_allclose(wedge(a, a), 0.0, atol=1e-12)
    np.testing.assert_allclose(wedge(wedge(a, b), c), wedge(a, wedge(b, c)), atol=1e-11)
    assert is_antisymmetric(wedge(b, c))


def test_compress_expand_batch():
    rng = np.random.default_rng(1)
    coeffs = rng.standard_normal((3, len(index_sets(5, 3))))
    full = expand(coeffs, 5, 3)
    assert full.shape == (3, 5, 5, 5)
    np.testing.assert_allclose(compress(full, 3), coeffs)


def test_interior_is_derivation():
    rng = np.random.default_rng(2)
    v = rng.standard_normal(5)
    a = rng.standard_normal(5)
    b = antisymmetrize(rng.standard_normal((5, 5)))
    lhs = interior(v, wedge(a, b))
    rhs = (v @ a) * b - wedge(a, interior(v, b))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_degree_cap():
    with pytest.raises(UsageError):
        index_sets(8, MAX_FORM_DEGREE + 1)
    e = basis_form(8, (0, 1, 2))
    with pytest.raises(UsageError):
        wedge(e, basis_form(8, (3, 4, 5)))


def test_lower_star_needs_degree_two():
    with pytest.raises(UsageError):
        lower_star(np.zeros((4, 4)), np.zeros(4))


def test_flat_model_and_invalid_structure():
    model = HermitianModel.flat(3)
    assert model.dim == 6 and model.m == 3
    assert not model.has_triple
    with pytest.raises(UsageError):
        model.kraines
    with pytest.raises(ConstructionError):
        HermitianModel(J=np.eye(4))


def test_quaternionic_triple_relations(quat_models):
    for model in quat_models.values():
        I1, I2, I3 = model.I
        np.testing.assert_allclose(I1 @ I2, I3, atol=1e-14)
        np.testing.assert_allclose(I2 @ I3, I1, atol=1e-14)
        np.testing.assert_allclose(I3 @ I1, I2, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_algebra_primitives(quat_models, n):
    all_pass(algebra_primitives(quat_models[n], seed=n, tol=TOL))


def test_algebra_primitives_flat():
    all_pass(algebra_primitives(HermitianModel.flat(4), seed=0, tol=TOL))


def test_kahler_self_contraction_value():
    model = HermitianModel.flat(4)
    assert float(lower_star(model.omega, model.omega)) == pytest.approx(4.0)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_ls_identity(m):
    model = HermitianModel.flat(m)
    rng = np.random.default_rng(m)
    F = model.random_form2(rng)
    F = F - model.proj_omega(F)
    assert check_ls(model, F, TOL).passed
    assert check_ls(model, np.zeros_like(F), TOL).passed


def test_ls_rejects_non_primitive():
    model = HermitianModel.flat(3)
    result = check_ls(model, model.omega, TOL)
    assert result.status is Status.FAIL
    assert "precondition" in result.detail


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kraines(quat_models, n):
    all_pass(check_kraines(quat_models[n], TOL, seed=n))


def test_kraines_constants_m4(quat4):
    results = {r.name: r for r in check_kraines(quat4, TOL)}
    assert results["kraines_norm"].detail["value"] == pytest.approx(120.0)
    w1 = quat4.omegas[0]
    np.testing.assert_allclose(lower_star(w1, quat4.kraines_tilde), 8.0 * w1, atol=1e-11)


def test_kraines_needs_triple():
    with pytest.raises(UsageError):
        check_kraines(HermitianModel.flat(4), TOL)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_quadratic_identities_j_commuting(quat_models, n):
    model = quat_models[n]
    rng = np.random.default_rng(10 + n)
    for _ in range(3):
        h = random_j_sym(model, rng)
        v = model.random_vector(rng)
        all_pass(check_quadratic_identities(model, h, v, TOL, h2=model.random_sym(rng, traceless=True)))


@pytest.mark.parametrize("n", [1, 2])
def test_quadratic_identities_sp_type(quat_models, n):
    model = quat_models[n]
    rng = np.random.default_rng(20 + n)
    h = random_sp_sym(model, rng)
    all_pass(check_quadratic_identities(model, h, model.random_vector(rng), TOL))


def test_quadratic_identities_first_line_m4(quat4):
    rng = np.random.default_rng(5)
    h = random_j_sym(quat4, rng)
    v = quat4.random_vector(rng)
    results = {r.name: r for r in check_quadratic_identities(quat4, h, v, TOL)}
    assert results["contraction_w2_w2"].passed


def test_quadratic_identities_general_h_reports_precondition(quat4):
    rng = np.random.default_rng(6)
    h = quat4.random_sym(rng, traceless=True)
    results = {r.name: r for r in check_quadratic_identities(quat4, h, quat4.random_vector(rng), TOL)}
    assert "precondition" in results["contraction_w2_w2"].detail
    for name in ("contraction_kraines_kraines", "C_anticommutator", "C_quadratic", "iota_kraines_pairing"):
        assert results[name].passed, name


def test_quadratic_identities_zero_inputs(quat4):
    z = np.zeros((quat4.dim, quat4.dim))
    all_pass(check_quadratic_identities(quat4, z, np.zeros(quat4.dim), TOL))


def test_C_quadratic_many(quat4):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        h = quat4.random_sym(rng)
        Ch = quat4.C(h)
        worst = max(worst, float(np.max(np.abs(quat4.C(Ch) + 2 * Ch - 3 * h))))
    assert worst < 1e-12


def test_dim3_wedge():
    all_pass(check_dim3_wedge(TOL, seed=0, samples=100))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_anti_type(m):
    model = HermitianModel.flat(m)
    rng = np.random.default_rng(m)
    h = model.random_anti(rng)
    all_pass(check_anti_type(model, h, TOL, seed=m))


def test_anti_type_precondition():
    model = HermitianModel.flat(2)
    results = check_anti_type(model, np.eye(4), TOL)
    assert results[0].status is Status.FAIL
