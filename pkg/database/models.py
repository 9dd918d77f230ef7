"""
Data models for the run ledger.
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import List, Optional
import json


@dataclass
class ExperimentEntry:
    """Outputs and timing of one experiment inside a run."""
    name: str
    kind: str
    passed: bool
    wall_clock: float
    csv_path: Optional[str] = None
    json_path: Optional[str] = None
    cache_hit: bool = False

    def to_dict(self) -> dict:
        """Convert model to dictionary."""
        return {
            'name': self.name,
            'kind': self.kind,
            'passed': self.passed,
            'wall_clock': self.wall_clock,
            'csv_path': self.csv_path,
            'json_path': self.json_path,
            'cache_hit': self.cache_hit
        }


@dataclass
class RunManifest:
    """Model for one CLI run: identity of the inputs and where the outputs went."""
    tool_version: str
    config_hash: str
    master_seed: int
    workers: int
    started_at: datetime
    experiments: List[ExperimentEntry] = field(default_factory=list)
    finished_at: Optional[datetime] = None
    exit_code: Optional[int] = None
    id: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.experiments)

    def to_dict(self) -> dict:
        """Convert model to dictionary."""
        return {
            'id': self.id,
            'tool_version': self.tool_version,
            'config_hash': self.config_hash,
            'master_seed': self.master_seed,
            'workers': self.workers,
            'started_at': self.started_at.isoformat(),
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
            'exit_code': self.exit_code,
            'experiments': [e.to_dict() for e in self.experiments]
        }

    def to_json(self) -> str:
        """Serialize manifest to a JSON string."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class ReportModel:
    """Model for storing one experiment summary of a run."""
    run_id: int
    experiment: str
    kind: str
    passed: bool
    wall_clock: float
    summary: dict
    cache_hit: bool = False
    id: Optional[int] = None

    def summary_to_json(self) -> str:
        """Serialize summary dict to JSON string."""
        return json.dumps(self.summary, sort_keys=True)

    @staticmethod
    def summary_from_json(json_str: Optional[str]) -> dict:
        """Deserialize summary from JSON string to dict."""
        if not json_str:
            return {}
        try:
            return json.loads(json_str)
        except (json.JSONDecodeError, TypeError):
            return {}

    def to_dict(self) -> dict:
        """Convert model to dictionary."""
        return {
            'id': self.id,
            'run_id': self.run_id,
            'experiment': self.experiment,
            'kind': self.kind,
            'passed': self.passed,
            'wall_clock': self.wall_clock,
            'cache_hit': self.cache_hit,
            'summary': self.summary
        }
