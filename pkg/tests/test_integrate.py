import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import SampleError, UsageError
from src.core.events import Status
from src.grassmann.killing import z_of
from src.integrate.checks import check_integral_identities, check_invariance, check_schur_mu2
from src.integrate.estimate import estimate, mc_integral, sample_values
from src.integrate.invariants import invariant_forms
from src.integrate.sampler import HaarSampler
from src.lie_core import SuMatrix, random_su
from src.utils.calc_utils import is_unitary


def none_failed(results):
    bad = [(r.name, r.residual) for r in results if r.status is Status.FAIL]
    assert not bad, bad


def z_integrand(model, A):
    return lambda _, g: z_of(model, g.conj().T @ A.entries @ g)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), index=st.integers(0, 10_000), N=st.sampled_from([4, 5]))
def test_sampler_is_counter_based(seed, index, N):
    sampler = HaarSampler(N, seed)
    U = sampler.unitary(index)
    assert is_unitary(U, 1e-12)
    assert abs(np.linalg.det(U) - 1.0) < 1e-12
    np.testing.assert_array_equal(U, HaarSampler(N, seed).unitary(index))


def test_sampler_rejects_bad_arguments():
    with pytest.raises(UsageError):
        HaarSampler(1, 0)
    with pytest.raises(UsageError):
        HaarSampler(4, -1)


def test_sampler_entry_moment():
    sampler = HaarSampler(4, 3)
    est = mc_integral(lambda _, g: abs(g[0, 0]) ** 2, sampler, 4000)
    assert est.zscore(0.25) < 5


def test_constant_integrand_is_exact():
    est = mc_integral(lambda _, g: 1.0, HaarSampler(4, 0), 50)
    assert est.mean == 1.0 and est.stderr == 0.0
    assert est.zscore(1.0) == 0.0


def test_worker_count_does_not_change_samples(grassmann_models):
    model = grassmann_models[2]
    f = z_integrand(model, random_su(2, 1))
    sampler = HaarSampler(model.N, 11)
    serial = sample_values(f, sampler, 600, jobs=1, chunk=100)
    parallel = sample_values(f, sampler, 600, jobs=8, chunk=100)
    np.testing.assert_array_equal(serial, parallel)
    assert estimate(serial[:, 0]).mean == estimate(parallel[:, 0]).mean


def test_non_finite_sample_names_index():
    def f(i, _):
        return np.nan if i == 7 else 0.0

    with pytest.raises(SampleError) as err:
        mc_integral(f, HaarSampler(4, 0), 20)
    assert err.value.index == 7


def test_too_few_samples():
    with pytest.raises(UsageError):
        mc_integral(lambda _, g: 0.0, HaarSampler(4, 0), 1)


def test_moment_map_integrates_to_zero(grassmann_models):
    model = grassmann_models[3]
    est = mc_integral(z_integrand(model, random_su(3, 4)), HaarSampler(model.N, 5), 3000)
    assert est.zscore(0.0) < 5


def test_stderr_scales_with_sample_count(grassmann_models):
    model = grassmann_models[2]
    f = z_integrand(model, random_su(2, 2))
    small = mc_integral(f, HaarSampler(model.N, 9), 2000)
    large = mc_integral(f, HaarSampler(model.N, 9), 8000)
    assert small.stderr / large.stderr == pytest.approx(2.0, rel=0.2)


@pytest.mark.parametrize("n", [2, 3])
def test_mu2_positive_and_matches_schur(grassmann_models, n):
    model = grassmann_models[n]
    A = random_su(n, 6)
    est = invariant_forms(model, [A, A], "mu2", HaarSampler(model.N, 1), 3000)
    assert est.mean > 0
    assert est.zscore(model.mu2_exact(A, A)) < 5


def test_mu3_vanishes_for_m4(grassmann_models):
    model = grassmann_models[2]
    A = random_su(2, 12)
    est = invariant_forms(model, [A, A, A], "mu3", HaarSampler(model.N, 2), 5000)
    assert est.zscore(0.0) < 5


def test_invariant_forms_usage_errors(grassmann_models):
    model = grassmann_models[2]
    sampler = HaarSampler(model.N, 0)
    with pytest.raises(UsageError):
        invariant_forms(model, [random_su(3, 0)] * 2, "mu2", sampler, 10)
    with pytest.raises(UsageError):
        invariant_forms(model, [random_su(2, 0)] * 2, "mu4", sampler, 10)
    with pytest.raises(UsageError):
        invariant_forms(model, [random_su(2, 0)] * 2, "nu", sampler, 10)


def test_schur_mu2_mixed_pair(grassmann_models):
    model = grassmann_models[3]
    results = check_schur_mu2(model, random_su(3, 1), random_su(3, 2), HaarSampler(model.N, 4), 3000)
    none_failed(results)
    assert results[0].detail["exact"] == pytest.approx(model.mu2_exact(random_su(3, 1), random_su(3, 2)))


def test_zero_field_identities_are_exact(grassmann_models):
    model = grassmann_models[2]
    A = SuMatrix(2, np.zeros((4, 4)))
    results = check_integral_identities(model, A, random_su(2, 0), HaarSampler(model.N, 0), 20)
    assert all(r.passed for r in results)


@pytest.mark.parametrize("n", [2, 3])
def test_integral_identities_quick(grassmann_models, n):
    model = grassmann_models[n]
    results = check_integral_identities(model, random_su(n, 40), random_su(n, 41), HaarSampler(model.N, 7), 2000)
    none_failed(results)
    by_name = {r.name: r for r in results}
    assert by_name["hamiltonian_integral"].passed
    assert ("mu3_vanishes" in by_name) == (n == 2)
    assert by_name["idXz"].detail["n_samples"] == 2000


@pytest.mark.parametrize("n", [2, 3])
def test_invariance_and_symmetry(grassmann_models, n):
    model = grassmann_models[n]
    mats = [random_su(n, 50 + k) for k in range(4)]
    none_failed(check_invariance(model, *mats, HaarSampler(model.N, 8), 2000))


@pytest.mark.slow
def test_integral_identities_acceptance_n3(grassmann_models):
    model = grassmann_models[3]
    results = check_integral_identities(
        model, random_su(3, 1), random_su(3, 2), HaarSampler(model.N, 2024), 100_000, jobs=4,
    )
    none_failed(results)
    assert {"idXz", "int_eqp_e", "int_eqp_q", "int_eqp_p", "nu_ratio"} <= {r.name for r in results}


@pytest.mark.slow
def test_mu3_vanishes_acceptance_n2(grassmann_models):
    model = grassmann_models[2]
    A = random_su(2, 3)
    est = invariant_forms(model, [A, A, A], "mu3", HaarSampler(model.N, 2024), 100_000, jobs=4)
    assert est.zscore(0.0) < 5
