import pytest

from config.config import (
    DEFAULT_CONFIG_PATH, JOBS_ENV, RESIDUAL_TOLERANCES, RunConfig, Tolerances, build_run_config, load_config,
)
from src.core.errors import ConfigError


@pytest.fixture(scope="module")
def raw():
    return load_config(DEFAULT_CONFIG_PATH)


def test_base_config_defaults(raw):
    config = build_run_config(raw, env={})
    assert config.n == (2, 3)
    assert config.grid == 9
    assert config.fixtures == ("torus3", "sphere3", "cp2")
    tol = config.tolerances
    assert tol.algebra == 1e-10 and isinstance(tol.algebra, float)
    assert tol.hyperquadric == 1e-9
    assert tol.grassmann == 1e-8
    assert tol.chart_pointwise == 1e-7
    assert tol.chart_weak == 1e-6
    assert (tol.zscore_accept, tol.zscore_reject) == (3.0, 5.0)
    assert config.log_file is None


def test_environment_then_flags(raw):
    assert build_run_config(raw, env={JOBS_ENV: "4"}).jobs == 4
    assert build_run_config(raw, overrides={"jobs": 2}, env={JOBS_ENV: "4"}).jobs == 2
    assert build_run_config(raw, overrides={"jobs": None}, env={JOBS_ENV: "3"}).jobs == 3


def test_bad_environment(raw):
    with pytest.raises(ConfigError):
        build_run_config(raw, env={JOBS_ENV: "many"})


def test_tol_flag_replaces_residual_tolerances(raw):
    tol = build_run_config(raw, overrides={"tol": 1e-5}, env={}).tolerances
    for name in RESIDUAL_TOLERANCES:
        assert getattr(tol, name) == 1e-5
    assert (tol.zscore_accept, tol.zscore_reject) == (3.0, 5.0)


def test_flag_lists_become_tuples(raw):
    config = build_run_config(raw, overrides={"n": [3], "fixtures": ["torus3"]}, env={})
    assert config.n == (3,)
    assert config.fixtures == ("torus3",)


@pytest.mark.parametrize("overrides", [
    {"n": [1]},
    {"n": [2, 1]},
    {"suite": "geometry"},
    {"fixtures": ["klein4"]},
    {"grid": 0},
    {"mc_samples": 1},
    {"seed": -1},
    {"tol": -1e-3},
    {"command": "classify"},
])
def test_invalid_settings(raw, overrides):
    with pytest.raises(ConfigError):
        build_run_config(raw, overrides=overrides, env={})


def test_unknown_sections_and_keys():
    with pytest.raises(ConfigError):
        build_run_config({"run": {"speed": 3}}, env={})
    with pytest.raises(ConfigError):
        build_run_config({"tolerances": {"chart_strong": 1e-3}}, env={})
    with pytest.raises(ConfigError):
        build_run_config({"logging": {"base_level": "LOUD"}}, env={})
    with pytest.raises(ConfigError):
        build_run_config({"logging": {"filepath": "log.json"}}, env={})


def test_zscore_thresholds_ordered():
    with pytest.raises(ConfigError):
        Tolerances(zscore_accept=5.0, zscore_reject=3.0).validate()


def test_empty_config_uses_dataclass_defaults():
    config = build_run_config({}, env={})
    assert config == RunConfig()


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("run: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("3\n")
    with pytest.raises(ConfigError):
        load_config(str(scalar))


def test_echo_lists_effective_tolerances(raw):
    echo = build_run_config(raw, overrides={"tol": 1e-4}, env={}).echo()
    assert echo["tolerances"]["chart_weak"] == 1e-4
    assert echo["n"] == [2, 3]
