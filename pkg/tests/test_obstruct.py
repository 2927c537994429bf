import numpy as np
import pytest

from src.core.errors import UsageError
from src.core.events import Status
from src.grassmann.killing import combine_halves, obstruction_halves, obstruction_integrand
from src.integrate.sampler import HaarSampler
from src.lie_core import SuMatrix, hyperquadric_sample, random_su
from src.obstruct import (
    Verdict, alg_constants, check_alg_identity, classify, closed_form, closed_form_coefficient,
    first_half_constant, obstruction_closed_form, obstruction_direct, proportionality_c, rigidity_scan,
    second_half_constant,
)


def none_failed(results):
    bad = [(r.name, r.residual) for r in results if r.status is Status.FAIL]
    assert not bad, bad


@pytest.mark.parametrize("m, c1, c2", [(4, -4.0, 0.0), (6, -48.0, 400.0 / 9.0)])
def test_alg_constants(m, c1, c2):
    assert alg_constants(m) == pytest.approx((c1, c2))


def test_closed_form_coefficient_m6(grassmann_models):
    model = grassmann_models[3]
    assert closed_form_coefficient(model) == pytest.approx(5120.0 / 81.0 * model.E ** 4)
    # P = 3 (first half) - 4E (second half)
    total = 3.0 * first_half_constant(model) - 4.0 * model.E * second_half_constant(model)
    assert total == pytest.approx(closed_form_coefficient(model))


def test_closed_form_m4_branch(grassmann_models):
    model = grassmann_models[2]
    with pytest.raises(UsageError):
        closed_form_coefficient(model)
    with pytest.raises(UsageError):
        first_half_constant(model)
    coef, kind = closed_form(model)
    assert kind == "nu" and coef == pytest.approx(6.0 * model.E ** 2)


def test_direct_of_zero_is_zero(grassmann_models):
    model = grassmann_models[2]
    est = obstruction_direct(model, SuMatrix(2, np.zeros((4, 4))), HaarSampler(4, 0), 10)
    assert est.mean == 0.0 and est.stderr == 0.0


def test_direct_is_cubic(grassmann_models):
    model = grassmann_models[3]
    A = random_su(3, 5)
    sampler = HaarSampler(model.N, 1)
    one = obstruction_direct(model, A, sampler, 50)
    two = obstruction_direct(model, A.scaled(2.0), sampler, 50)
    assert two.mean == pytest.approx(8.0 * one.mean, rel=1e-9)


def test_direct_and_classify_share_integrand(grassmann_models):
    model = grassmann_models[3]
    A = random_su(3, 8)
    sampler = HaarSampler(model.N, 2)
    bases = [sampler.unitary(i).conj().T @ A.entries @ sampler.unitary(i) for i in range(30)]
    pointwise = [obstruction_integrand(model, B) for B in bases]
    assert pointwise[0] == pytest.approx(combine_halves(model, *obstruction_halves(model, bases[0])))
    scale = 1e-10 * max(abs(v) for v in pointwise)
    direct = obstruction_direct(model, A, sampler, 30)
    assert direct.mean == pytest.approx(float(np.mean(pointwise)), abs=scale)
    verdict = classify(model, A, sampler, 30)
    assert verdict.P_direct.mean == pytest.approx(direct.mean, abs=scale)


@pytest.mark.parametrize("n", [2, 3])
def test_alg_identity(grassmann_models, n):
    results = check_alg_identity(grassmann_models[n], 1e-9, seed=n)
    assert results[0].passed, results[0].residual


@pytest.mark.parametrize("n", [2, 3])
def test_closed_form_summands(grassmann_models, n):
    model = grassmann_models[n]
    results, (coef, invariant), direct = obstruction_closed_form(
        model, random_su(n, 60), HaarSampler(model.N, 3), 1500,
    )
    none_failed(results)
    by_name = {r.name: r for r in results}
    for name in ("cons_pointwise", "orthogonality_last", "square_Q"):
        assert by_name[name].passed, (name, by_name[name].residual)
    assert ("pairing_epsilon" in by_name) == (n == 3)
    assert invariant.n_samples == direct.n_samples == 1500


def test_classify_zero_is_integrable(grassmann_models):
    model = grassmann_models[3]
    verdict = classify(model, SuMatrix(3, np.zeros((5, 5))), HaarSampler(5, 0), 50)
    assert verdict.verdict is Verdict.INTEGRABLE
    assert verdict.in_hyperquadric and verdict.potential_vanishes


@pytest.mark.parametrize("scale", [1.0, -2.5])
def test_classify_hyperquadric_member(grassmann_models, scale):
    model = grassmann_models[2]
    A = hyperquadric_sample(2, 7).scaled(scale)
    verdict = classify(model, A, HaarSampler(4, 11), 2000)
    assert verdict.in_hyperquadric and verdict.potential_vanishes
    assert verdict.verdict is Verdict.INTEGRABLE
    assert verdict.P_direct.zscore(0.0) < 5


def test_classify_base_generator(grassmann_models):
    model = grassmann_models[2]
    verdict = classify(model, SuMatrix(2, 2.0 * model.Z), HaarSampler(4, 1), 200, with_polynomial=False)
    assert verdict.verdict is Verdict.INTEGRABLE
    assert verdict.P_direct is None and verdict.P_closed is None


def test_classify_generic_n3_is_obstructed(grassmann_models):
    model = grassmann_models[3]
    verdict = classify(model, random_su(3, 17), HaarSampler(5, 4), 20_000, with_polynomial=False, jobs=4)
    assert not verdict.in_hyperquadric and not verdict.potential_vanishes
    assert verdict.verdict is Verdict.OBSTRUCTED


def test_proportionality_fit_reports_c(grassmann_models):
    model = grassmann_models[3]
    results, c = proportionality_c(model, 4, HaarSampler(5, 2), 800, seed=3)
    assert results[0].status is not Status.FAIL
    assert np.isfinite(c)
    assert "note" in results[0].detail


def test_proportionality_needs_matrices(grassmann_models):
    with pytest.raises(UsageError):
        proportionality_c(grassmann_models[2], 0, HaarSampler(4, 0), 10)


@pytest.mark.slow
def test_generic_direct_nonzero_n2(grassmann_models):
    model = grassmann_models[2]
    est = obstruction_direct(model, random_su(2, 21), HaarSampler(4, 5), 20_000, jobs=4)
    assert est.zscore(0.0) > 5


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3])
def test_pipelines_agree(grassmann_models, n):
    model = grassmann_models[n]
    for k in range(10):
        results, _, _ = obstruction_closed_form(model, random_su(n, 300 + k), HaarSampler(model.N, k), 5000, jobs=4)
        none_failed(results)


@pytest.mark.slow
def test_rigidity_n3(grassmann_models):
    results = rigidity_scan(grassmann_models[3], 100, HaarSampler(5, 9), 20_000, seed=1000, jobs=4)
    assert all(r.passed for r in results), [(r.name, r.detail) for r in results]
