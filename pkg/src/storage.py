"""
Artifact storage for runs, sweeps, tables and scenarios.

Traces are line-delimited JSON with a fixed field order and no timestamps, so
identical runs produce byte-identical files. Reports and scenarios are JSON
documents; overwritten ones are backed up first. Every write goes through a
temporary file and os.replace.
"""

import json
import os
import shutil
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from adversary import AdversaryScenario, build_topology, topology_selector
from errors import InputError
from move_tables import MoveTable
from swarm import Placement, Schedule, TraceStep
from utils.logger import LoggerMixin
from verifier import SweepSpec, Violation


class ScenarioFile(BaseModel):
    """On-disk form of an adversary scenario; vertices are rendered strings."""

    name: str
    topology: str = Field(pattern="^(hypercube|grid|clique|bipartite)$")
    size: Optional[int] = Field(None, ge=1)
    counts: Dict[str, int]
    schedule: List[int]
    algorithm: str
    expected: str = Field(pattern="^(recurrence-detected|gathered|rejected|horizon-exhausted)$")
    rationale: str = ""
    script: Dict[str, str] = Field(default_factory=dict)
    horizon_epochs: int = Field(4, ge=1)

    @field_validator("counts")
    @classmethod
    def _positive_counts(cls, counts: Dict[str, int]) -> Dict[str, int]:
        if not counts:
            raise ValueError("a scenario needs at least one robot")
        bad = [v for v, n in counts.items() if n < 1]
        if bad:
            raise ValueError(f"counts must be positive at {', '.join(bad)}")
        return counts

    @model_validator(mode="after")
    def _schedule_is_permutation(self) -> "ScenarioFile":
        k = sum(self.counts.values())
        if sorted(self.schedule) != list(range(k)):
            raise ValueError(f"schedule must be a permutation of 0..{k - 1}")
        return self

    @classmethod
    def from_scenario(cls, scenario: AdversaryScenario) -> "ScenarioFile":
        kind, size = topology_selector(scenario.topology)
        render = scenario.topology.render_vertex
        return cls(
            name=scenario.name,
            topology=kind,
            size=size,
            counts={render(v): n for v, n in scenario.placement.counts},
            schedule=list(scenario.schedule.order),
            algorithm=scenario.algorithm,
            expected=scenario.expected,
            rationale=scenario.rationale,
            script={render(a): render(b) for a, b in sorted(scenario.script.items())},
            horizon_epochs=scenario.horizon_epochs,
        )

    @classmethod
    def from_violation(cls, violation: Violation, spec: SweepSpec, algorithm: str, index: int = 0) -> "ScenarioFile":
        """Replayable scenario for a sweep violation; resolver branches are not recorded."""
        return cls(
            name=f"violation-{index}-{violation.kind}",
            topology=spec.topology,
            size=spec.dimension if spec.topology == "hypercube" else None,
            counts=violation.counts,
            schedule=list(violation.schedule),
            algorithm=algorithm,
            expected="gathered",
            rationale=violation.message,
            horizon_epochs=spec.horizon_epochs,
        )

    def to_scenario(self) -> AdversaryScenario:
        topology = build_topology(self.topology, self.size)
        parse = topology.parse_vertex
        return AdversaryScenario(
            name=self.name,
            topology=topology,
            placement=Placement.from_counts({parse(v): n for v, n in self.counts.items()}),
            schedule=Schedule(tuple(self.schedule)),
            algorithm=self.algorithm,
            expected=self.expected,
            rationale=self.rationale,
            script={parse(a): parse(b) for a, b in self.script.items()},
            horizon_epochs=self.horizon_epochs,
        )


class ArtifactStorage(LoggerMixin):
    """
    Writes run artifacts under one output directory.

    Features:
    - Trace files (line-delimited, deterministic)
    - Sweep and certification reports with backups
    - Move table dumps and DOT graphs
    - Scenario files loadable by the adversary module
    """

    def __init__(self, output_dir: str = "artifacts", log_level: str = "INFO", log_dir: str = "logs"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.backup_dir = self.output_dir / "backups"
        self.backup_dir.mkdir(exist_ok=True)

        self.setup_logging(log_level, log_dir)
        self.log_debug(f"Storage initialized - Output dir: {self.output_dir}")

    def path_for(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() or path.parent != Path(".") else self.output_dir / path

    def _atomic_write(self, path: Path, text: str) -> bool:
        tmp_name = None
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile("w", encoding="utf-8", dir=path.parent, delete=False,
                                             prefix=f".{path.name}.", suffix=".tmp") as handle:
                tmp_name = handle.name
                handle.write(text)
            os.replace(tmp_name, path)
            return True
        except OSError as e:
            self.log_error(f"Failed to write {path}: {e}")
            if tmp_name and os.path.exists(tmp_name):
                os.unlink(tmp_name)
            return False

    def save_trace(self, steps: Iterable[TraceStep], name: str = "trace.jsonl") -> Optional[Path]:
        """
        Save a trace as one JSON record per round.

        Returns:
            Path written, or None on failure
        """
        path = self.path_for(name)
        lines = [json.dumps(step.to_record(), ensure_ascii=False) for step in steps]
        if not self._atomic_write(path, "\n".join(lines) + ("\n" if lines else "")):
            return None
        self.log_info(f"Saved trace with {len(lines)} rounds to {path}")
        return path

    def load_trace_records(self, name: str) -> List[Dict[str, Any]]:
        path = self.path_for(name)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return [json.loads(line) for line in f if line.strip()]
        except (OSError, json.JSONDecodeError) as e:
            self.log_error(f"Failed to load trace {path}: {e}")
            return []

    def save_report(self, report: Dict[str, Any], name: str = "report.json") -> Optional[Path]:
        """Save a report with saved_at metadata, backing up any previous version."""
        path = self.path_for(name)
        data = {"saved_at": datetime.now().isoformat(), **report}
        if path.exists():
            self._create_backup(path)
        if not self._atomic_write(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n"):
            return None
        self.log_info(f"Saved report to {path}")
        return path

    def load_report(self, name: str) -> Optional[Dict[str, Any]]:
        path = self.path_for(name)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            self.log_error(f"Failed to load report {path}: {e}")
            return None
        self.log_debug(f"Loaded report {path} (saved at: {data.get('saved_at', 'unknown')})")
        return data

    def save_table(self, table: MoveTable, name: Optional[str] = None) -> Optional[Path]:
        path = self.path_for(name or f"{table.name}.json")
        data = {"table": table.name, "classes": len(table), "max_depth": table.max_depth,
                "entries": table.to_records()}
        if not self._atomic_write(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n"):
            return None
        self.log_info(f"Saved table {table.name} ({len(table)} classes) to {path}")
        return path

    def save_scenario(self, scenario: ScenarioFile, name: Optional[str] = None) -> Optional[Path]:
        path = self.path_for(name or f"{scenario.name}.scenario.json")
        if path.exists():
            self._create_backup(path)
        if not self._atomic_write(path, scenario.model_dump_json(indent=2) + "\n"):
            return None
        self.log_info(f"Saved scenario {scenario.name} to {path}")
        return path

    def load_scenario(self, name: str) -> Optional[ScenarioFile]:
        """
        Load a scenario file.

        Returns:
            The scenario, or None if the file cannot be read

        Raises:
            InputError: If the file is readable but not a valid scenario
        """
        path = self.path_for(name)
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = f.read()
        except OSError as e:
            self.log_error(f"Failed to load scenario {path}: {e}")
            return None
        try:
            return ScenarioFile.model_validate_json(raw)
        except ValidationError as e:
            raise InputError(f"Invalid scenario file {path}: {e}")

    def save_text(self, text: str, name: str) -> Optional[Path]:
        path = self.path_for(name)
        if not self._atomic_write(path, text):
            return None
        self.log_info(f"Saved {path}")
        return path

    def _create_backup(self, file_path: Path) -> bool:
        """Create a timestamped backup of a file."""
        try:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
            backup_path = self.backup_dir / f"{file_path.stem}_{timestamp}{file_path.suffix}"
            shutil.copy2(file_path, backup_path)
            self._cleanup_old_backups(file_path.stem, file_path.suffix)
            return True
        except OSError as e:
            self.log_error(f"Failed to create backup: {e}")
            return False

    def _cleanup_old_backups(self, file_stem: str, suffix: str, max_backups: int = 10):
        """Keep only the most recent backups."""
        try:
            backup_files = sorted(self.backup_dir.glob(f"{file_stem}_*{suffix}"))
            for old_backup in backup_files[:-max_backups]:
                old_backup.unlink()
        except OSError as e:
            self.log_error(f"Failed to cleanup old backups: {e}")
