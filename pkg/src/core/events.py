from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

import numpy as np


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    seq_id: int
    suite: str
    name: str
    reference: str
    status: Status
    residual: float
    tolerance: float
    samples: int = 1
    wall_time: float = 0.0
    detail: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS


def residual_result(
    suite: str,
    name: str,
    reference: str,
    residual: float,
    tolerance: float,
    samples: int = 1,
    wall_time: float = 0.0,
    detail: Optional[Dict[str, Any]] = None,
) -> CheckResult:
    """
    Record for a residual compared against a tolerance.

    A non-finite residual always fails. Sequence ids are assigned when the
    record is published on a `ResultBus`.
    """
    residual = float(residual)
    ok = bool(np.isfinite(residual)) and residual < tolerance
    return CheckResult(
        seq_id=0,
        suite=suite,
        name=name,
        reference=reference,
        status=Status.PASS if ok else Status.FAIL,
        residual=residual,
        tolerance=float(tolerance),
        samples=samples,
        wall_time=wall_time,
        detail=detail or {},
    )


def precondition_failure(suite: str, name: str, reference: str, reason: str, residual: float = float("nan")) -> CheckResult:
    return CheckResult(
        seq_id=0,
        suite=suite,
        name=name,
        reference=reference,
        status=Status.FAIL,
        residual=float(residual),
        tolerance=0.0,
        detail={"precondition": reason},
    )


def lower_bound_result(
    suite: str,
    name: str,
    reference: str,
    value: float,
    bound: float,
    detail: Optional[Dict[str, Any]] = None,
) -> CheckResult:
    """Passes when `value` exceeds `bound`, e.g. a smallest singular value or an expected nonzero."""
    value = float(value)
    ok = bool(np.isfinite(value)) and value > bound
    return CheckResult(
        seq_id=0,
        suite=suite,
        name=name,
        reference=reference,
        status=Status.PASS if ok else Status.FAIL,
        residual=value,
        tolerance=float(bound),
        detail={"kind": "lower_bound", **(detail or {})},
    )


def zscore_result(
    suite: str,
    name: str,
    reference: str,
    zscore: float,
    accept: float,
    reject: float,
    samples: int,
    detail: Optional[Dict[str, Any]] = None,
) -> CheckResult:
    """
    Record for a Monte-Carlo identity expressed as a z-score against zero.

    Below `accept` the identity passes, above `reject` it fails, in between
    the record is inconclusive.
    """
    zscore = float(zscore)
    if not np.isfinite(zscore) or zscore > reject:
        status = Status.FAIL
    elif zscore < accept:
        status = Status.PASS
    else:
        status = Status.INCONCLUSIVE
    return CheckResult(
        seq_id=0,
        suite=suite,
        name=name,
        reference=reference,
        status=status,
        residual=zscore,
        tolerance=float(accept),
        samples=samples,
        detail={"kind": "zscore", **(detail or {})},
    )


def inconclusive_result(suite: str, name: str, reference: str, reason: str, detail: Optional[Dict[str, Any]] = None) -> CheckResult:
    return CheckResult(
        seq_id=0,
        suite=suite,
        name=name,
        reference=reference,
        status=Status.INCONCLUSIVE,
        residual=float("nan"),
        tolerance=0.0,
        detail={"reason": reason, **(detail or {})},
    )


def merge_worst(results: Iterable[CheckResult]) -> List[CheckResult]:
    """
    Collapse repeated runs of the same checks into one record per name.

    The kept record is the first failure, then the first inconclusive one, or the largest residual when all
    passed; samples and wall time are summed. First-seen name order is kept.
    """
    groups: Dict[str, List[CheckResult]] = {}
    for r in results:
        groups.setdefault(r.name, []).append(r)
    out = []
    for name, group in groups.items():
        failing = [r for r in group if r.status is Status.FAIL] or [r for r in group if r.status is Status.INCONCLUSIVE]
        if failing:
            worst = failing[0]
        else:
            worst = max(group, key=lambda r: r.residual)
        out.append(replace(
            worst,
            samples=sum(r.samples for r in group),
            wall_time=sum(r.wall_time for r in group),
            detail={**worst.detail, "runs": len(group)},
        ))
    return out
