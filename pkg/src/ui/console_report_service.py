"""
Console output for the stylekit command line.

Summaries are printed as `key=value` lines on stdout; errors as a single
`error: code=<n> kind=<kind> reason=<message>` line on stderr.
"""

import sys
from typing import Any, Dict, Iterable, List, Optional, TextIO

from src.models.errors import StylekitError
from src.services.pipeline_service import JobOutcome, PipelineReport


def _value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return " ".join(str(value).split())


class ConsoleReportService:
    """
    Service formatting command results for the terminal.

    Single Responsibility: Text layout of summaries and error lines only.
    """

    def __init__(self, out: Optional[TextIO] = None, err: Optional[TextIO] = None):
        """
        Initialize the reporter.

        Args:
            out: Stream for summaries, stdout when None
            err: Stream for error lines, stderr when None
        """
        self._out = out
        self._err = err

    @property
    def out(self) -> TextIO:
        return self._out or sys.stdout

    @property
    def err(self) -> TextIO:
        return self._err or sys.stderr

    def format_summary(self, fields: Dict[str, Any], prefix: str = "") -> List[str]:
        """One `key=value` line per field, in insertion order."""
        return [f"{prefix}{key}={_value(value)}" for key, value in fields.items()]

    def summary(self, fields: Dict[str, Any], prefix: str = "") -> None:
        """Print a summary block."""
        for line in self.format_summary(fields, prefix):
            print(line, file=self.out)

    def format_error(self, exit_code: int, kind: str, reason: str) -> str:
        """Machine-parsable error line."""
        return f"error: code={exit_code} kind={kind} reason={' '.join(reason.split())}"

    def error(self, error: StylekitError) -> None:
        """Print a structured error."""
        print(self.format_error(error.exit_code, error.kind, error.reason), file=self.err)

    def pipeline(self, report: PipelineReport) -> None:
        """Print one line group per stage."""
        for stage in report.stages:
            prefix = f"{stage.name}."
            if stage.skipped:
                self.summary({"status": "skipped", "reason": stage.skipped}, prefix)
                continue
            fields: Dict[str, Any] = {"status": "ok"}
            fields["outputs"] = ",".join(path.name for path in stage.outputs)
            fields.update(stage.details)
            self.summary(fields, prefix)

    def jobs(self, outcomes: Iterable[JobOutcome]) -> int:
        """
        Print batch outcomes.

        Returns:
            Highest exit code among the jobs, 0 when all succeeded
        """
        worst = 0
        for outcome in outcomes:
            print(f"manifest={outcome.manifest}", file=self.out)
            if outcome.error is not None:
                code, kind, reason = outcome.error
                print(self.format_error(code, kind, reason), file=self.err)
                worst = max(worst, code)
            else:
                self.pipeline(outcome.report)
        return worst
