"""
Machine-readable run reports.

JSON is the single report format; the aligned text tables printed by the
CLI are rendered from the same structs.
"""
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

import msgspec
import numpy as np

from src.core.events import CheckResult, Status
from src.integrate.estimate import MCEstimate
from src.obstruct import ObstructionVerdict

TOOL_NAME = "einstein-lab"
VERSION = "0.1.0"


class CheckRecord(msgspec.Struct):
    seq_id: int
    suite: str
    name: str
    reference: str
    status: str
    residual: Optional[float]
    tolerance: float
    samples: int
    wall_time: float
    detail: Dict[str, Any] = {}


class MCEstimateRecord(msgspec.Struct):
    mean: float
    stderr: float
    n_samples: int
    seed: Optional[int] = None


class VerdictRecord(msgspec.Struct):
    n: int
    verdict: str
    in_hyperquadric: bool
    potential_vanishes: bool
    max_pairing_zscore: float
    pairing_zscores: List[float]
    P_direct: Optional[MCEstimateRecord] = None
    P_closed_coefficient: Optional[float] = None
    P_closed_invariant: Optional[MCEstimateRecord] = None
    diagnostics: Dict[str, Any] = {}


class ConstantsRecord(msgspec.Struct):
    n: int
    m: int
    E: float
    lambda_Q_over_E: float
    lambda_E_over_E: float
    c1: float
    c2: float
    c3_over_E4: Optional[float]
    closed_form_over_E4: Optional[float]
    closed_form: str


class Report(msgspec.Struct):
    tool: str
    version: str
    config: Dict[str, Any]
    checks: List[CheckRecord] = []
    summary: Dict[str, int] = {}
    verdict: Optional[VerdictRecord] = None
    constants: List[ConstantsRecord] = []


def _enc_hook(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise NotImplementedError(f"Cannot encode {type(obj).__name__}")


_encoder = msgspec.json.Encoder(enc_hook=_enc_hook)


def _plain(value: Any) -> Any:
    """Detail payloads as builtin containers, so they round-trip through JSON unchanged."""
    return msgspec.json.decode(_encoder.encode(value))


def _finite_or_none(value: float) -> Optional[float]:
    value = float(value)
    return value if np.isfinite(value) else None


def check_record(result: CheckResult) -> CheckRecord:
    return CheckRecord(
        seq_id=result.seq_id,
        suite=result.suite,
        name=result.name,
        reference=result.reference,
        status=Status(result.status).value,
        residual=_finite_or_none(result.residual),
        tolerance=float(result.tolerance),
        samples=int(result.samples),
        wall_time=float(result.wall_time),
        detail=_plain(result.detail),
    )


def estimate_record(est: Optional[MCEstimate]) -> Optional[MCEstimateRecord]:
    if est is None:
        return None
    return MCEstimateRecord(mean=float(est.mean), stderr=float(est.stderr), n_samples=est.n_samples, seed=est.seed)


def verdict_record(verdict: ObstructionVerdict) -> VerdictRecord:
    zs = [float(z) for z in verdict.pairing_zscores]
    coefficient, invariant = verdict.P_closed if verdict.P_closed is not None else (None, None)
    return VerdictRecord(
        n=verdict.A.n,
        verdict=verdict.verdict.value,
        in_hyperquadric=bool(verdict.in_hyperquadric),
        potential_vanishes=bool(verdict.potential_vanishes),
        max_pairing_zscore=max(zs, default=0.0),
        pairing_zscores=zs,
        P_direct=estimate_record(verdict.P_direct),
        P_closed_coefficient=None if coefficient is None else float(coefficient),
        P_closed_invariant=estimate_record(invariant),
        diagnostics=_plain(verdict.diagnostics),
    )


def constants_record(row: Dict[str, Any]) -> ConstantsRecord:
    return msgspec.convert(_plain(row), ConstantsRecord)


def summarize(checks: Iterable[CheckRecord]) -> Dict[str, int]:
    summary = {status.value: 0 for status in Status}
    for record in checks:
        summary[record.status] += 1
    return summary


def build_report(
    config: Dict[str, Any],
    results: Iterable[CheckResult] = (),
    verdict: Optional[ObstructionVerdict] = None,
    constants: Iterable[Dict[str, Any]] = (),
) -> Report:
    checks = [check_record(r) for r in results]
    return Report(
        tool=TOOL_NAME,
        version=VERSION,
        config=_plain(config),
        checks=checks,
        summary=summarize(checks),
        verdict=None if verdict is None else verdict_record(verdict),
        constants=[constants_record(row) for row in constants],
    )


def encode_report(report: Report) -> bytes:
    return _encoder.encode(report)


def decode_report(raw: bytes) -> Report:
    return msgspec.json.decode(raw, type=Report)


def write_report(report: Report, path: str) -> None:
    with open(path, "wb") as file:
        file.write(encode_report(report))
        file.write(b"\n")


# -- text rendering

def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:.3e}"


def _table(header: List[str], rows: List[List[str]]) -> str:
    widths = [max(len(header[k]), *(len(r[k]) for r in rows)) if rows else len(header[k]) for k in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(line.rstrip() for line in lines)


def render_checks(report: Report) -> str:
    header = ["SUITE", "CHECK", "STATUS", "RESIDUAL", "TOL", "SAMPLES", "TIME(s)"]
    rows = [
        [r.suite, r.name, r.status, _fmt(r.residual), _fmt(r.tolerance), str(r.samples), f"{r.wall_time:.2f}"]
        for r in report.checks
    ]
    tally = ", ".join(f"{k}={v}" for k, v in report.summary.items())
    return f"{_table(header, rows)}\n\n{tally}"


def render_verdict(record: VerdictRecord) -> str:
    lines = [
        f"n = {record.n}: {record.verdict}",
        f"  in hyperquadric     {record.in_hyperquadric}",
        f"  potential vanishes  {record.potential_vanishes}",
        f"  max pairing z       {record.max_pairing_zscore:.3f}",
    ]
    if record.P_direct is not None:
        lines.append(f"  P direct            {record.P_direct.mean:.6e} +- {record.P_direct.stderr:.2e}")
    if record.P_closed_invariant is not None:
        closed = record.P_closed_coefficient * record.P_closed_invariant.mean
        lines.append(f"  P closed form       {closed:.6e}")
    if "reason" in record.diagnostics:
        lines.append(f"  reason              {record.diagnostics['reason']}")
    return "\n".join(lines)


def render_constants(rows: List[ConstantsRecord]) -> str:
    header = ["n", "m", "E", "Lambda_Q/E", "Lambda_E/E", "c1", "c2", "c3/E^4", "P coefficient/E^4"]
    body = [
        [
            str(r.n), str(r.m), f"{r.E:g}", f"{r.lambda_Q_over_E:.6f}", f"{r.lambda_E_over_E:.6f}",
            f"{r.c1:g}", f"{r.c2:g}",
            "-" if r.c3_over_E4 is None else f"{r.c3_over_E4:.6f}",
            r.closed_form if r.closed_form_over_E4 is None else f"{r.closed_form_over_E4:.6f}",
        ]
        for r in rows
    ]
    return _table(header, body)


def render(report: Report) -> str:
    parts = []
    if report.checks:
        parts.append(render_checks(report))
    if report.verdict is not None:
        parts.append(render_verdict(report.verdict))
    if report.constants:
        parts.append(render_constants(report.constants))
    return "\n\n".join(parts)
