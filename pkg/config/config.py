import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from src.chart.fixtures import FIXTURES
from src.core.errors import ConfigError
from src.utils.logging.handlers.file import FileLogConfig
from src.utils.logging.logger import LoggerConfig

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "base_config.yaml")
JOBS_ENV = "EINSTEIN_LAB_JOBS"

COMMANDS = ("verify", "classify", "constants", "sample")
SUITES = ("algebra", "chart", "grassmann", "integrals", "obstruction", "all")

# tolerances replaced by a single --tol; z-score thresholds are kept
RESIDUAL_TOLERANCES = ("algebra", "hyperquadric", "grassmann", "chart_pointwise", "chart_first_variation", "chart_weak")


def load_config(config_path=DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    try:
        with open(config_path, "r") as file:
            config = yaml.safe_load(file)
    except OSError as e:
        raise ConfigError(f"Cannot read config {config_path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {config_path}: {e}") from e
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(f"Config {config_path} must be a mapping, got {type(config).__name__}")
    return config


@dataclass(frozen=True)
class Tolerances:
    """
    Per-suite tolerances.

    Residual tolerances are relative residual bounds; a z-score below
    `zscore_accept` passes, above `zscore_reject` fails and in between is
    inconclusive.
    """

    algebra: float = 1e-10
    hyperquadric: float = 1e-9
    grassmann: float = 1e-8
    chart_pointwise: float = 1e-7
    chart_first_variation: float = 1e-8
    chart_weak: float = 1e-6
    zscore_accept: float = 3.0
    zscore_reject: float = 5.0

    def overridden(self, tol: float) -> "Tolerances":
        return replace(self, **{name: float(tol) for name in RESIDUAL_TOLERANCES})

    def validate(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"Tolerance {f.name} must be a positive number, got {value!r}")
        if self.zscore_accept >= self.zscore_reject:
            raise ConfigError(
                f"zscore_accept ({self.zscore_accept}) must be below zscore_reject ({self.zscore_reject})"
            )


@dataclass(frozen=True)
class RunConfig:
    """
    Effective settings of one CLI run.

    Built from YAML defaults, then the environment (job count), then command
    line flags; later sources win.
    """

    command: str = "verify"
    suite: str = "all"
    n: Tuple[int, ...] = (2, 3)
    seed: int = 1
    mc_samples: int = 20000
    grid: int = 9
    jobs: int = 1
    fixtures: Tuple[str, ...] = ("torus3", "sphere3", "cp2")
    points: int = 20
    triples: int = 5
    koiso_fields: int = 5
    matrices: int = 10
    rigidity_count: int = 20
    matrix: Optional[str] = None
    out: Optional[str] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    logger: LoggerConfig = field(default_factory=LoggerConfig)
    log_file: Optional[FileLogConfig] = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command!r}, expected one of {COMMANDS}")
        if self.suite not in SUITES:
            raise ConfigError(f"Unknown suite {self.suite!r}, expected one of {SUITES}")
        if not self.n:
            raise ConfigError("At least one n is required")
        for n in self.n:
            if not isinstance(n, int) or n < 2:
                raise ConfigError(f"n must be an integer >= 2, got {n!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        for name in ("mc_samples", "grid", "jobs", "points", "triples", "koiso_fields", "matrices", "rigidity_count"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.mc_samples < 2:
            raise ConfigError(f"mc_samples must be at least 2, got {self.mc_samples}")
        unknown = [name for name in self.fixtures if name not in FIXTURES]
        if unknown:
            raise ConfigError(f"Unknown fixtures {unknown}, expected names from {sorted(FIXTURES)}")
        if self.command == "classify" and not self.matrix:
            raise ConfigError("classify needs --matrix")
        self.tolerances.validate()
        try:
            self.logger.validate()
            if self.log_file is not None:
                self.log_file.validate()
        except ValueError as e:
            raise ConfigError(f"Invalid logging config: {e}") from e

    def echo(self) -> Dict[str, Any]:
        """Settings that determine the results, as echoed in reports."""
        return {
            "command": self.command,
            "suite": self.suite,
            "n": list(self.n),
            "seed": self.seed,
            "mc_samples": self.mc_samples,
            "grid": self.grid,
            "jobs": self.jobs,
            "fixtures": list(self.fixtures),
            "points": self.points,
            "triples": self.triples,
            "koiso_fields": self.koiso_fields,
            "matrices": self.matrices,
            "rigidity_count": self.rigidity_count,
            "matrix": self.matrix,
            "tolerances": asdict(self.tolerances),
        }


def _as_tuple(value: Any) -> Tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def _section(raw: Mapping[str, Any], name: str) -> Dict[str, Any]:
    section = raw.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"Config section {name!r} must be a mapping")
    return dict(section)


def _jobs_from_env(env: Mapping[str, str]) -> Optional[int]:
    value = env.get(JOBS_ENV)
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{JOBS_ENV} must be an integer, got {value!r}") from None


def build_run_config(
    raw: Mapping[str, Any],
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Merge YAML defaults < environment < flag overrides into a validated RunConfig.

    Overrides set to None are ignored; `tol` replaces every residual
    tolerance at once.
    """
    env = os.environ if env is None else env
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    run = _section(raw, "run")
    known = {f.name for f in fields(RunConfig)} - {"tolerances", "logger", "log_file"}
    unknown = sorted(set(run) - known)
    if unknown:
        raise ConfigError(f"Unknown run settings {unknown}")

    jobs = _jobs_from_env(env)
    if jobs is not None:
        run["jobs"] = jobs

    tol = overrides.pop("tol", None)
    run.update(overrides)
    for name in ("n", "fixtures"):
        if name in run:
            run[name] = _as_tuple(run[name])

    try:
        tolerances = Tolerances(**_section(raw, "tolerances"))
    except TypeError as e:
        raise ConfigError(f"Invalid tolerances section: {e}") from e
    if tol is not None:
        tolerances = tolerances.overridden(tol)

    log = _section(raw, "logging")
    filepath = log.pop("filepath", None)
    try:
        logger = LoggerConfig(**log)
    except TypeError as e:
        raise ConfigError(f"Invalid logging section: {e}") from e
    log_file = FileLogConfig(filepath=filepath) if filepath else None

    config = RunConfig(**run, tolerances=tolerances, logger=logger, log_file=log_file)
    config.validate()
    return config
