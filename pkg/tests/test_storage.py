import json

import pytest

from adversary import full_graph_scenario, p2_scenario
from errors import InputError
from gather_hypercube import synthesize_t1_table
from storage import ArtifactStorage, ScenarioFile
from swarm import Placement, Schedule
from topology import Hypercube, SquareGrid
from verifier import SweepSpec, Violation


@pytest.fixture
def storage(tmp_path):
    return ArtifactStorage(str(tmp_path / "out"), log_dir=str(tmp_path / "logs"))


@pytest.fixture
def pair_trace(q3_engine):
    placement = Placement.from_counts({(0, 0, 0): 1, (0, 1, 1): 1})
    return q3_engine.run(placement, Schedule.identity(2), 4).trace


def test_trace_files_are_deterministic(storage, pair_trace):
    first = storage.save_trace(pair_trace, "a.jsonl")
    second = storage.save_trace(pair_trace, "b.jsonl")
    assert first.read_bytes() == second.read_bytes()
    records = storage.load_trace_records("a.jsonl")
    assert len(records) == len(pair_trace)
    assert records[0]["active_vertex"] == "000"
    assert records[0]["destination"] == "001"
    assert records[-1]["task"] == "GATHERED"


def test_missing_trace_loads_empty(storage):
    assert storage.load_trace_records("nothing.jsonl") == []


def test_path_for(storage, tmp_path):
    assert storage.path_for("x.json") == storage.output_dir / "x.json"
    nested = tmp_path / "elsewhere" / "x.json"
    assert storage.path_for(str(nested)) == nested


def test_report_overwrite_keeps_backup(storage):
    storage.save_report({"instances": 1})
    storage.save_report({"instances": 2})
    data = storage.load_report("report.json")
    assert data["instances"] == 2
    assert "saved_at" in data
    backups = list(storage.backup_dir.glob("report_*.json"))
    assert len(backups) == 1
    assert json.loads(backups[0].read_text(encoding="utf-8"))["instances"] == 1


def test_backups_are_capped(storage):
    for i in range(13):
        storage.save_report({"i": i}, "capped.json")
    assert len(list(storage.backup_dir.glob("capped_*.json"))) == 10


def test_missing_report_is_none(storage):
    assert storage.load_report("absent.json") is None


def test_save_table(storage):
    table = synthesize_t1_table()
    path = storage.save_table(table)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert path.name == f"{table.name}.json"
    assert data["classes"] == 21
    assert data["max_depth"] == table.max_depth
    assert len(data["entries"]) == 21


def test_scenario_round_trip(storage):
    scenario = full_graph_scenario(Hypercube(3))
    storage.save_scenario(ScenarioFile.from_scenario(scenario), "chase.json")
    loaded = storage.load_scenario("chase.json").to_scenario()
    assert loaded.topology == Hypercube(3)
    assert loaded.placement == scenario.placement
    assert loaded.schedule == scenario.schedule
    assert loaded.script == scenario.script
    assert loaded.expected == scenario.expected


def test_grid_scenario_renders_vertices():
    data = ScenarioFile.from_scenario(p2_scenario(SquareGrid()))
    assert data.topology == "grid"
    assert data.size is None
    assert sum(data.counts.values()) == 3
    assert all(v.startswith("(") for v in data.counts)


def test_invalid_scenario_raises(storage):
    storage.save_text('{"name": "x", "topology": "torus", "counts": {}, "schedule": [], '
                      '"algorithm": "grid", "expected": "gathered"}', "bad.json")
    with pytest.raises(InputError):
        storage.load_scenario("bad.json")


def test_missing_scenario_is_none(storage):
    assert storage.load_scenario("absent.json") is None


@pytest.mark.parametrize("schedule", [[0, 0, 1], [0, 1], [1, 2, 3]])
def test_schedule_must_be_permutation(schedule):
    with pytest.raises(ValueError):
        ScenarioFile(name="s", topology="hypercube", size=3, counts={"000": 2, "011": 1},
                     schedule=schedule, algorithm="hypercube", expected="gathered")


def test_violation_becomes_scenario():
    violation = Violation("cycle", "an adversarial branch revisits a state", {"000": 2, "001": 1}, (1, 0, 2))
    data = ScenarioFile.from_violation(violation, SweepSpec(), "hypercube", index=4)
    assert data.name == "violation-4-cycle"
    assert data.size == 3
    scenario = data.to_scenario()
    assert scenario.placement == Placement.from_counts({(0, 0, 0): 2, (0, 0, 1): 1})
    assert scenario.schedule.order == (1, 0, 2)
