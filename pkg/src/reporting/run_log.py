"""
Run Log
Keeps the per-point status trail of a CLI run and produces its manifest.
"""

import json
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.models.state import Command, CurvePoint, Q0Threshold, RecoveryRate, RunManifest


@dataclass
class StatusEntry:
    """Single status log entry."""
    event_type: str  # point, q0, rate, error
    details: Dict[str, Any]
    outcome: Optional[str] = None


class RunRecorder:
    """
    Records what happened to every point of a run.

    Every entry includes:
    - Identity: which (kind, alpha, q) or (alpha, beta) the entry refers to
    - Outcome: ok, flagged or error
    - Flags: the anomalies carried by the row
    """

    def __init__(self, command: Command, request: Dict[str, Any], version: str, config_hash: str):
        self.entries: List[StatusEntry] = []
        self.manifest = RunManifest(command=command, request=request, version=version,
                                    config_hash=config_hash)
        self._clock: Optional[float] = None

    def start(self):
        """Stamp the start time; wall-clock is measured from here."""
        self.manifest.started_at = datetime.now(timezone.utc).isoformat()
        self._clock = time.perf_counter()

    def log_point(self, point: CurvePoint):
        """Log one curve point."""
        errors = [f for f in point.flags if f.startswith('error:')]
        self._add_entry(StatusEntry(
            event_type='point',
            details={
                'kind': point.kind.value,
                'alpha': point.alpha,
                'q': point.q,
                'flags': list(point.flags),
            },
            outcome='error' if errors else ('flagged' if point.flags else 'ok'),
        ))

    def log_q0(self, row: Q0Threshold):
        """Log one q -> 0 closed-form threshold."""
        self._add_entry(StatusEntry(
            event_type='q0',
            details={'kind': row.kind.value, 'alpha': row.alpha, 'c3_max': row.c3_max},
            outcome='ok' if row.beta > 0.0 else 'flagged',
        ))

    def log_rate(self, row: RecoveryRate):
        """Log one Monte Carlo beta point."""
        self._add_entry(StatusEntry(
            event_type='rate',
            details={'alpha': row.alpha, 'beta': row.beta, 'q': row.q, 'discarded': row.discarded},
            outcome='flagged' if row.discarded else 'ok',
        ))

    def log_error(self, message: str, context: Optional[Dict[str, Any]] = None):
        """Log a run-level failure."""
        self._add_entry(StatusEntry(event_type='error', details={'message': message, **(context or {})},
                                    outcome='error'))

    def _add_entry(self, entry: StatusEntry):
        self.entries.append(entry)

    def failures(self) -> List[Dict[str, Any]]:
        """Entries whose outcome is an error."""
        return [asdict(e) for e in self.entries if e.outcome == 'error']

    def finish(self) -> RunManifest:
        """Close the run: wall-clock and per-point status go into the manifest."""
        if self._clock is not None:
            self.manifest.wall_clock_seconds = time.perf_counter() - self._clock
        self.manifest.point_status = [asdict(e) for e in self.entries]
        return self.manifest

    def export_to_json(self, filepath: Path):
        """Export the manifest (with the status trail) to a JSON file."""
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.finish().to_dict(), f, indent=2, sort_keys=True)
