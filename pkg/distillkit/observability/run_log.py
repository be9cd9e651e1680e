"""
Run Log

Per-run event log in JSONL format. Each analysis invoked with a log
directory gets its own file with the full stage history of the decision
tree. This is the only place wall-clock timestamps are written.
"""

import json
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog

logger = structlog.get_logger(__name__)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunLog:
    """Logger for a single analysis run"""

    def __init__(self, log_dir: Path, command: str, source: str, run_id: Optional[str] = None):
        """
        Initialize the log for one run

        Args:
            log_dir: Directory receiving the .jsonl file
            command: CLI subcommand or library entry point
            source: Input descriptor (file path or generator name)
            run_id: Explicit run id (random when omitted)
        """
        self.run_id = run_id or uuid.uuid4().hex[:12]
        self.command = command
        self.source = source

        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
        self.log_file = log_dir / f"{timestamp}_{self.run_id}.jsonl"

        self.log_analysis_started()

    def _write_to_file(self, data: Dict[str, Any]):
        """Write a log entry to the JSONL file"""
        with open(self.log_file, 'a') as f:
            json.dump(data, f, default=str)
            f.write('\n')

    def _entry(self, event: str, **fields) -> Dict[str, Any]:
        return {"timestamp": _now(), "event": event, "run_id": self.run_id, **fields}

    def log_analysis_started(self):
        """Log the start of the run"""
        self._write_to_file(self._entry("analysis.started", command=self.command, source=self.source))

    def log_stage(self, stage: str, outcome: str, details: Optional[Dict[str, Any]] = None):
        """
        Log one evaluated decision-tree stage

        Args:
            stage: Stage identifier (e.g. 'ppt-check', 'negdet')
            outcome: Short outcome tag ('fired', 'skipped', 'miss')
            details: Extra numbers describing the stage
        """
        self._write_to_file(self._entry("stage.evaluated", stage=stage, outcome=outcome, details=details or {}))

    def log_verdict(self, kind: str, provenance: str, elapsed_seconds: float):
        """Log the final verdict"""
        self._write_to_file(self._entry(
            "verdict.reached", kind=kind, provenance=provenance, elapsed_seconds=elapsed_seconds
        ))

    def log_failure(self, error: BaseException):
        """Log an exception that aborted the run"""
        self._write_to_file(self._entry(
            "analysis.failed", error_type=type(error).__name__, message=str(error)
        ))
        logger.error("analysis.failed", run_id=self.run_id, error=str(error))

    def get_log_contents(self) -> List[Dict[str, Any]]:
        """Read back every entry of this run"""
        return read_run_log(self.log_file)


def read_run_log(log_file: Path) -> List[Dict[str, Any]]:
    """
    Load all entries of a run log

    Malformed lines are skipped with a warning.
    """
    entries = []
    with open(log_file, 'r') as f:
        for line_num, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError as e:
                logger.warning("run_log.parse_failed", line=line_num, error=str(e))
    return entries
