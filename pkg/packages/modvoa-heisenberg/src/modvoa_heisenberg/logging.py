"""Logging infrastructure for verification runs."""

import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.syntax import Syntax
from rich.table import Table

from modvoa_heisenberg.report import CheckResult, CheckStatus

_STATUS_COLOR = {
    CheckStatus.PASS: "green",
    CheckStatus.FAIL: "red",
    CheckStatus.PRECONDITION: "yellow",
    CheckStatus.ERROR: "magenta",
}


@dataclass
class CheckLogEntry:
    """A single check outcome."""

    timestamp: datetime
    suite: str
    check_id: str
    status: CheckStatus
    instances: int = 0
    duration_ms: float | None = None
    counterexample: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "timestamp": self.timestamp.isoformat(),
            "suite": self.suite,
            "check": self.check_id,
            "status": self.status.value,
            "instances": self.instances,
            "duration_ms": self.duration_ms,
            "counterexample": self.counterexample,
        }


@dataclass
class VerifyLogger:
    """Logger for check outcomes with rich console output."""

    name: str = "modvoa"
    level: str = "WARNING"
    log_file: str | None = None
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    log_checks: bool = True
    entries: list[CheckLogEntry] = field(default_factory=list)
    console: Console = field(default_factory=lambda: Console(stderr=True))
    _logger: logging.Logger | None = field(default=None, init=False)

    def __post_init__(self) -> None:
        """Set up the Python logger."""
        self._logger = logging.getLogger(self.name)
        self._logger.setLevel(getattr(logging, self.level.upper()))
        self._logger.handlers.clear()

        formatter = logging.Formatter(self.format)
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, self.level.upper()))
        console_handler.setFormatter(formatter)
        self._logger.addHandler(console_handler)

        if self.log_file:
            file_handler = logging.FileHandler(self.log_file)
            file_handler.setLevel(getattr(logging, self.level.upper()))
            file_handler.setFormatter(formatter)
            self._logger.addHandler(file_handler)

    def log_check(
        self, suite: str, result: CheckResult, duration_ms: float | None = None
    ) -> CheckLogEntry:
        """Record the outcome of one check."""
        entry = CheckLogEntry(
            timestamp=datetime.now(),
            suite=suite,
            check_id=result.check_id,
            status=result.status,
            instances=result.instances,
            duration_ms=duration_ms,
            counterexample=result.counterexample,
        )
        if self.log_checks:
            self.entries.append(entry)

        if self._logger:
            if not result.is_failure:
                self._logger.info(
                    f"{suite}.{result.check_id}: {result.status.value}"
                    f" ({result.instances} instances)"
                )
            else:
                self._logger.warning(
                    f"{suite}.{result.check_id}: {result.status.value} - "
                    f"{json.dumps(result.counterexample, sort_keys=True)}"
                )
        return entry

    def get_entries(
        self,
        status: CheckStatus | None = None,
        suite: str | None = None,
        limit: int | None = None,
    ) -> list[CheckLogEntry]:
        """Get log entries with optional filtering."""
        result = self.entries

        if status:
            result = [e for e in result if e.status == status]

        if suite:
            result = [e for e in result if e.suite == suite]

        if limit:
            result = result[-limit:]

        return result

    def clear(self) -> None:
        """Clear all log entries."""
        self.entries.clear()

    def export_json(self) -> str:
        """Export all log entries as JSON."""
        return json.dumps([e.to_dict() for e in self.entries], indent=2)

    def print_entry(self, entry: CheckLogEntry) -> None:
        """Print a log entry, with its counterexample, with rich formatting."""
        color = _STATUS_COLOR[entry.status]
        title = f"[{color}]{entry.status.value.upper()}[/] - {entry.suite}.{entry.check_id}"
        if entry.duration_ms:
            title += f" ({entry.duration_ms:.2f}ms)"

        json_str = json.dumps(entry.counterexample or {}, indent=2, sort_keys=True)
        syntax = Syntax(json_str, "json", theme="monokai", line_numbers=False)

        panel = Panel(
            syntax,
            title=title,
            subtitle=entry.timestamp.strftime("%H:%M:%S.%f")[:-3],
            border_style=color,
        )
        self.console.print(panel)

    def print_summary(self) -> None:
        """Print a summary table of all recorded checks."""
        table = Table(title="Verification Summary")
        table.add_column("Suite", style="dim")
        table.add_column("Check", style="bold")
        table.add_column("Instances", justify="right")
        table.add_column("Duration (ms)", justify="right")
        table.add_column("Status")

        for entry in self.entries:
            color = _STATUS_COLOR[entry.status]
            duration = f"{entry.duration_ms:.2f}" if entry.duration_ms else "-"
            table.add_row(
                entry.suite,
                entry.check_id,
                str(entry.instances),
                duration,
                f"[{color}]{entry.status.value}[/]",
            )

        self.console.print(table)
