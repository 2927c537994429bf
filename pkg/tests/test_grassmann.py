import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import UsageError
from src.core.events import Status
from src.grassmann.checks import (
    check_curvature, check_epsilon, check_hermitian_killing, check_killing_structure, check_moment_maps,
    _bracket_sides,
)
from src.grassmann.killing import (
    dx_of, epsilon_map, epsilon_of, killing_jet, transvection_series, x_of, z_of,
)
from src.grassmann.model import build_model
from src.lie_core import SuMatrix, random_su
from src.tensor_alg.forms import norm2
from src.utils.calc_utils import haar_unitary

TOL = 1e-9


def all_pass(results):
    bad = [(r.name, r.residual) for r in results if r.status is not Status.PASS]
    assert not bad, bad


@pytest.mark.parametrize("n, dim, ratio_Q, ratio_E", [(2, 8, 0.5, 0.5), (3, 12, 0.6, 0.4)])
def test_build_model_constants(grassmann_models, n, dim, ratio_Q, ratio_E):
    model = grassmann_models[n]
    assert model.dim == dim and model.m == 2 * n
    assert model.E == pytest.approx(n + 2)
    assert model.lambda_Q / model.E == pytest.approx(ratio_Q, abs=1e-10)
    assert model.lambda_E / model.E == pytest.approx(ratio_E, abs=1e-10)
    assert len(model.k_basis) == n * n + 3


def test_build_model_rejects_small_n():
    with pytest.raises(UsageError):
        build_model(1)


def test_metric_scale_rescales_constants():
    model = build_model(2, metric_scale=3.0)
    assert model.E == pytest.approx(4.0 / 3.0)
    assert model.lambda_Q / model.E == pytest.approx(0.5, abs=1e-10)
    all_pass(check_curvature(model, 1e-10))
    all_pass(check_killing_structure(model, random_su(2, 4), TOL))


@pytest.mark.parametrize("n", [2, 3])
def test_curvature(grassmann_models, n):
    all_pass(check_curvature(grassmann_models[n], 1e-10))


@pytest.mark.parametrize("n", [2, 3])
def test_killing_structure_base_point(grassmann_models, n):
    all_pass(check_killing_structure(grassmann_models[n], random_su(n, 10 + n), TOL))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([2, 3]))
def test_killing_structure_random_points(grassmann_models, seed, n):
    model = grassmann_models[n]
    g = haar_unitary(model.N, np.random.default_rng(seed))
    all_pass(check_killing_structure(model, random_su(n, seed), TOL, point=g))


def test_isotropy_element_vanishes_at_base(grassmann_models):
    model = grassmann_models[2]
    K = SuMatrix(2, model.k_basis[3])
    jet = killing_jet(model, K)
    assert np.max(np.abs(jet.X)) < 1e-14
    assert np.max(np.abs(jet.dX)) > 0.1
    all_pass(check_killing_structure(model, K, TOL))


def test_generator_of_J(grassmann_models):
    model = grassmann_models[2]
    Z = SuMatrix(2, model.Z)
    jet = killing_jet(model, Z)
    np.testing.assert_allclose(jet.dX_0, 0.0, atol=1e-13)
    np.testing.assert_allclose(jet.dX, 2.0 * model.hermitian.omega, atol=1e-13)
    assert jet.z == pytest.approx(model.z_vector_norm2())
    assert np.max(np.abs(epsilon_map(model, Z))) < 1e-13


def test_jet_equivariance(grassmann_models):
    model = grassmann_models[3]
    A = random_su(3, 1)
    g = haar_unitary(model.N, np.random.default_rng(2))
    moved, based = killing_jet(model, A, g), killing_jet(model, A.conjugated(g))
    np.testing.assert_allclose(moved.X, based.X, atol=1e-13)
    np.testing.assert_allclose(moved.dX, based.dX, atol=1e-13)
    assert moved.p == pytest.approx(based.p)


def test_jet_rejects_non_unitary_point(grassmann_models):
    model = grassmann_models[2]
    with pytest.raises(UsageError):
        killing_jet(model, random_su(2, 0), 2.0 * np.eye(4))
    with pytest.raises(UsageError):
        killing_jet(model, random_su(3, 0))


def test_jet_moment_maps_match_projections(grassmann_models):
    model = grassmann_models[3]
    jet = killing_jet(model, random_su(3, 5))
    assert jet.q == pytest.approx(float(norm2(jet.dX_Q)) / (4 * model.lambda_Q))
    assert jet.e == pytest.approx(float(norm2(jet.dX_E)) / (4 * model.lambda_E))


def test_transvection_series_first_order():
    u = np.zeros((4, 4), dtype=complex)
    u[2, 0], u[0, 2] = 1.0, -1.0
    B = np.diag([1j, -1j, 0, 0])
    A0, A1, A2 = transvection_series(u, B)
    np.testing.assert_allclose(A1, -(u @ B - B @ u))
    np.testing.assert_allclose(A2, -(u @ A1 - A1 @ u) / 2)


def test_epsilon_coefficient_m4(grassmann_models):
    model = grassmann_models[2]
    B = random_su(2, 8).entries
    hm = model.hermitian
    dX = dx_of(model, B)
    expected = dX - hm.proj_omega(dX) - 2.0 * hm.proj_Q(dX)
    np.testing.assert_allclose(epsilon_of(model, B), expected, atol=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_epsilon_injective(grassmann_models, n):
    results = {r.name: r for r in check_epsilon(grassmann_models[n], TOL)}
    assert results["epsilon_injective"].detail["rank"] == (n + 2) ** 2 - 1
    assert results["epsilon_of_generator"].passed


def test_epsilon_nonzero_when_field_nonzero(grassmann_models):
    model = grassmann_models[2]
    for seed in range(10):
        B = random_su(2, seed).entries
        assert np.max(np.abs(x_of(model, B))) > 1e-3
        assert np.max(np.abs(epsilon_of(model, B))) > 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_hermitian_killing(grassmann_models, n):
    all_pass(check_hermitian_killing(grassmann_models[n], random_su(n, 20 + n), TOL, points=3, seed=n))


def test_bracket_pairing_m4_many(grassmann_models):
    model = grassmann_models[2]
    worst = 0.0
    for seed in range(20):
        lhs, rhs = _bracket_sides(model, random_su(2, 100 + seed).entries)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    assert worst < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_moment_maps(grassmann_models, n):
    all_pass(check_moment_maps(grassmann_models[n], random_su(n, 30 + n), samples=10, tol=TOL, seed=n))


def test_moment_maps_hamiltonian_spread_n2(grassmann_models):
    results = {r.name: r for r in check_moment_maps(grassmann_models[2], random_su(2, 77), samples=20, tol=TOL)}
    assert results["hamiltonian_constant"].residual < 1e-9
    assert results["hamiltonian_constant"].samples == 20


def test_zero_field(grassmann_models):
    model = grassmann_models[2]
    A = SuMatrix(2, np.zeros((4, 4)))
    jet = killing_jet(model, A)
    assert jet.z == 0.0 and jet.q == 0.0 and jet.e == 0.0 and jet.p == 0.0
    all_pass(check_moment_maps(model, A, samples=3, tol=TOL))
    all_pass(check_killing_structure(model, A, TOL))


def test_z_vanishes_on_isotropy_complement(grassmann_models):
    model = grassmann_models[3]
    for e in model.m_basis:
        assert abs(z_of(model, e)) < 1e-15
