"""Check results and verification reports."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class CheckStatus(str, Enum):
    """Outcome of a single check."""

    PASS = "pass"
    FAIL = "fail"
    PRECONDITION = "precondition"
    ERROR = "error"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one checker, with a replayable counterexample on failure."""

    check_id: str
    status: CheckStatus
    instances: int = 0
    detail: str = ""
    counterexample: dict[str, Any] | None = None

    @classmethod
    def ok(cls, check_id: str, instances: int, detail: str = "") -> CheckResult:
        return cls(check_id, CheckStatus.PASS, instances, detail)

    @classmethod
    def failed(
        cls,
        check_id: str,
        counterexample: dict[str, Any],
        instances: int = 0,
        detail: str = "",
    ) -> CheckResult:
        return cls(check_id, CheckStatus.FAIL, instances, detail, counterexample)

    @classmethod
    def precondition(
        cls, check_id: str, detail: str, counterexample: dict[str, Any] | None = None
    ) -> CheckResult:
        return cls(check_id, CheckStatus.PRECONDITION, 0, detail, counterexample)

    @classmethod
    def error(cls, check_id: str, exc: Exception) -> CheckResult:
        return cls(check_id, CheckStatus.ERROR, 0, f"{type(exc).__name__}: {exc}")

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS

    @property
    def is_failure(self) -> bool:
        """Failures and errors; precondition results count as skipped."""
        return self.status in (CheckStatus.FAIL, CheckStatus.ERROR)

    def renamed(self, check_id: str) -> CheckResult:
        return CheckResult(check_id, self.status, self.instances, self.detail, self.counterexample)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        data: dict[str, Any] = {
            "check": self.check_id,
            "status": self.status.value,
            "instances": self.instances,
        }
        if self.detail:
            data["detail"] = self.detail
        if self.counterexample is not None:
            data["counterexample"] = self.counterexample
        return data


def combine(check_id: str, results: Iterable[CheckResult]) -> CheckResult:
    """Fold several results of the same check; the first non-pass wins."""
    total = 0
    for result in results:
        if not result.passed:
            return result.renamed(check_id)
        total += result.instances
    return CheckResult.ok(check_id, total)


@dataclass
class VerifyReport:
    """All check results of one suite run."""

    suite: str
    parameters: dict[str, Any]
    results: list[CheckResult] = field(default_factory=list)
    wall_time: float | None = None

    def __post_init__(self) -> None:
        self.results = sorted(self.results, key=lambda r: r.check_id)

    @property
    def passed(self) -> bool:
        return not any(r.is_failure for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.is_failure]

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "suite": self.suite,
            "parameters": self.parameters,
            "passed": self.passed,
            "checks": [r.to_dict() for r in self.results],
        }
        if include_timing and self.wall_time is not None:
            data["wall_time_s"] = round(self.wall_time, 3)
        return data

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)


def merge(suite: str, reports: Iterable[VerifyReport]) -> VerifyReport:
    """Concatenate suite reports, prefixing check ids with their suite."""
    collected = list(reports)
    results = [
        r.renamed(f"{report.suite}.{r.check_id}") for report in collected for r in report.results
    ]
    parameters = collected[0].parameters if collected else {}
    times = [r.wall_time for r in collected if r.wall_time is not None]
    return VerifyReport(suite, parameters, results, sum(times) if times else None)
