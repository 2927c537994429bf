import argparse
import asyncio
import sys
from typing import Any, Dict, List, Optional, Sequence

from config.config import COMMANDS, DEFAULT_CONFIG_PATH, SUITES, RunConfig, build_run_config, load_config
from src.core.errors import LabError, UsageError
from src.core.events import CheckResult
from src.grassmann.model import build_model
from src.integrate.sampler import HaarSampler
from src.lie_core import hyperquadric_sample, matrix_to_json, read_matrix, write_matrix
from src.obstruct import Verdict, classify, constants_summary
from src.report import Report, build_report, encode_report, render, write_report
from src.suites.runner import run_suites
from src.utils.logging.logger import Logger

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="einstein-lab",
        description="Numerical checks for second-order Einstein deformations.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML file with run defaults")
    parser.add_argument("--suite", choices=SUITES)
    parser.add_argument("--n", type=int, nargs="+", help="Grassmann parameters, N = n + 2")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float, help="replaces every residual tolerance")
    parser.add_argument("--mc-samples", dest="mc_samples", type=int)
    parser.add_argument("--grid", type=int, help="torus quadrature points per axis")
    parser.add_argument("--fixture", dest="fixtures", nargs="+", help="chart fixtures, e.g. torus3 sphere3 cp2")
    parser.add_argument("--matrix", help="su(n+2) matrix JSON for classify")
    parser.add_argument("--out", help="report path; JSON goes to stdout when omitted")
    parser.add_argument("--jobs", type=int, help="worker threads (default from EINSTEIN_LAB_JOBS)")
    return parser


def run_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    path = args.pop("config")
    return build_run_config(load_config(path), overrides=args)


def _emit(report: Report, out: Optional[str]) -> None:
    """JSON to `out` and the text table to stdout, or JSON to stdout and the table to stderr."""
    text = render(report)
    if out:
        write_report(report, out)
        if text:
            print(text)
    else:
        sys.stdout.write(encode_report(report).decode() + "\n")
        if text:
            print(text, file=sys.stderr)


def _exit_code(results: List[CheckResult]) -> int:
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


async def cmd_verify(config: RunConfig, logging: Logger) -> int:
    results = await run_suites(config, logging)
    _emit(build_report(config.echo(), results), config.out)
    failed = sum(1 for r in results if not r.passed)
    logging.info(f"VERIFY {config.suite} - {len(results)} checks, {failed} not passed")
    return _exit_code(results)


async def cmd_classify(config: RunConfig, logging: Logger) -> int:
    A = read_matrix(config.matrix)
    model = build_model(A.n)
    tol = config.tolerances
    loop = asyncio.get_running_loop()
    verdict = await loop.run_in_executor(None, lambda: classify(
        model, A, HaarSampler(model.N, config.seed), config.mc_samples,
        tol=tol.grassmann, accept=tol.zscore_accept, reject=tol.zscore_reject,
        points=config.points, jobs=config.jobs,
    ))
    logging.info(f"CLASSIFY n={A.n} - {verdict.verdict.value}")
    _emit(build_report(config.echo(), verdict=verdict), config.out)
    return EXIT_FAILED if verdict.verdict is Verdict.INCONCLUSIVE else EXIT_OK


async def cmd_constants(config: RunConfig, logging: Logger) -> int:
    rows: List[Dict[str, Any]] = [constants_summary(build_model(n)) for n in config.n]
    logging.info(f"CONSTANTS n={list(config.n)} - {len(rows)} rows")
    _emit(build_report(config.echo(), constants=rows), config.out)
    return EXIT_OK


async def cmd_sample(config: RunConfig, logging: Logger) -> int:
    n = config.n[0]
    A = hyperquadric_sample(n, config.seed)
    if config.out:
        write_matrix(A, config.out)
    else:
        sys.stdout.write(matrix_to_json(A).decode() + "\n")
    logging.info(f"SAMPLE n={n} - hyperquadric member with seed {config.seed}")
    return EXIT_OK


COMMAND_HANDLERS = {
    "verify": cmd_verify,
    "classify": cmd_classify,
    "constants": cmd_constants,
    "sample": cmd_sample,
}


async def run(config: RunConfig) -> int:
    logging = Logger(logger_config=config.logger, file_config=config.log_file)
    try:
        return await COMMAND_HANDLERS[config.command](config, logging)
    except UsageError as e:
        logging.error(f"{config.command.upper()} - {e}")
        return EXIT_USAGE
    except LabError as e:
        logging.error(f"{config.command.upper()} - {e}")
        return EXIT_FAILED
    finally:
        await logging.shutdown()


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = run_config(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return asyncio.run(run(config))


if __name__ == "__main__":
    sys.exit(main())
