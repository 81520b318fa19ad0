"""
Exhaustive model checking at desk scale.

Sweeps enumerate placements, activation orders and every resolver branch,
exploring each instance's state graph depth-first with memoization. Table
certification checks the class transition graphs of the synthesized move
tables. Trace checks cover task transitions, Round-Robin fairness, move
atomicity, the per-instance lower bound and offer equivariance.
"""

import itertools
import math
import random
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
from pydantic import BaseModel, Field, model_validator

from adversary import build_algorithm
from errors import CapabilityError, CertificationError, ContractViolation, InputError
from gather_grid import USTWitness, ust_witness
from gather_hypercube import UHWitness, uh_witness
from move_tables import MoveTable
from swarm import (GATHERED_LABEL, Configuration, GatheringAlgorithm, Placement, RunResult, Schedule,
                   Snapshot, TraceStep, epochs_lower_bound, is_nice_star, validate_offer)
from topology import DIHEDRAL_MATRICES, GridAutomorphism, Hypercube, SquareGrid, Topology, Vertex, mbr
from utils.logger import LoggerMixin, log_function_call, setup_logger
from utils.validators import CheckResult


logger = setup_logger(__name__)

Pair = Tuple[str, str, int]
State = Tuple[Tuple[Vertex, ...], int]


class SweepSpec(BaseModel):
    """Finite description of a verification sweep."""

    topology: str = Field("hypercube", pattern="^(hypercube|grid)$")
    dimension: int = Field(3, ge=1, le=5)
    mbr_rows: int = Field(3, ge=1)
    mbr_cols: int = Field(3, ge=1)
    max_robots: int = Field(4, ge=2)
    max_multiplicity: int = Field(3, ge=1)
    placement_policy: str = Field("exhaustive", pattern="^(exhaustive|random)$")
    samples: int = Field(1000, ge=1)
    schedule_policy: str = Field("all", pattern="^(all|canonical|sampled)$")
    schedule_samples: int = Field(3, ge=1)
    resolver_policy: str = Field("adversarial", pattern="^(adversarial|canonical)$")
    horizon_epochs: int = Field(12, ge=1)
    seed: int = 0
    max_instances: int = Field(200_000, ge=1)
    state_budget: int = Field(500_000, ge=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "SweepSpec":
        if self.topology == "hypercube" and self.max_robots > self.max_multiplicity * 2 ** self.dimension:
            raise ValueError("max_robots exceeds the capacity of the hypercube under the multiplicity cap")
        return self

    def build_topology(self) -> Topology:
        return Hypercube(self.dimension) if self.topology == "hypercube" else SquareGrid()


@dataclass
class Violation:
    kind: str
    message: str
    counts: Dict[str, int]
    schedule: Tuple[int, ...]
    state: Optional[List[str]] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "counts": self.counts,
            "schedule": list(self.schedule),
            "state": self.state,
        }


@dataclass
class SweepReport:
    """Aggregated outcome of a sweep; passes iff there are no violations."""
    instances: int = 0
    gathered: int = 0
    rejected: int = 0
    max_epochs: int = 0
    epoch_ratio: float = 0.0
    states_explored: int = 0
    lower_bound_checked: int = 0
    nice_star_checked: int = 0
    transition_pairs: Set[Pair] = field(default_factory=set)
    violations: List[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "SweepReport") -> None:
        self.instances += other.instances
        self.gathered += other.gathered
        self.rejected += other.rejected
        self.max_epochs = max(self.max_epochs, other.max_epochs)
        self.epoch_ratio = max(self.epoch_ratio, other.epoch_ratio)
        self.states_explored += other.states_explored
        self.lower_bound_checked += other.lower_bound_checked
        self.nice_star_checked += other.nice_star_checked
        self.transition_pairs |= other.transition_pairs
        self.violations.extend(other.violations)

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "gathered": self.gathered,
            "rejected": self.rejected,
            "max_epochs": self.max_epochs,
            "epoch_ratio": round(self.epoch_ratio, 6),
            "states_explored": self.states_explored,
            "lower_bound_checked": self.lower_bound_checked,
            "nice_star_checked": self.nice_star_checked,
            "transition_pairs": [list(p) for p in sorted(self.transition_pairs)],
            "violations": [v.to_dict() for v in self.violations],
            "passed": self.passed,
        }


@dataclass
class InstanceOutcome:
    worst_rounds: int
    best_rounds: int
    states: int


class _Abort(Exception):
    def __init__(self, kind: str, message: str, state: Optional[State] = None):
        self.kind = kind
        self.state = state
        super().__init__(message)


# ---------------------------------------------------------------------------
# Instance enumeration
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int, cap: int) -> Iterable[Tuple[int, ...]]:
    for counts in itertools.product(range(1, cap + 1), repeat=parts):
        if sum(counts) == total:
            yield counts


def _anchored(vertices: Iterable[Tuple[int, int]]) -> bool:
    vertices = list(vertices)
    return min(v[0] for v in vertices) == 0 and min(v[1] for v in vertices) == 0


def enumerate_placements(spec: SweepSpec, algorithm: Optional[GatheringAlgorithm] = None) -> List[Placement]:
    """
    Deterministic list of initial placements with at least two occupied vertices.

    Under the random policy, placements the algorithm rejects up front are
    redrawn when an algorithm is given, so `samples` counts checked instances.
    """
    if spec.placement_policy == "random":
        return _random_placements(spec, algorithm)
    if spec.topology == "hypercube":
        cells = Hypercube(spec.dimension).vertices()
    else:
        cells = [(r, c) for r in range(spec.mbr_rows) for c in range(spec.mbr_cols)]
    placements = []
    for k in range(2, spec.max_robots + 1):
        for size in range(2, k + 1):
            for chosen in itertools.combinations(cells, size):
                if spec.topology == "grid" and not _anchored(chosen):
                    continue
                for counts in _compositions(k, size, spec.max_multiplicity):
                    placements.append(Placement.from_counts(dict(zip(chosen, counts))))
    return placements


MAX_DRAWS_PER_SAMPLE = 100


def _random_placements(spec: SweepSpec, algorithm: Optional[GatheringAlgorithm] = None) -> List[Placement]:
    rng = random.Random(spec.seed)
    topology = spec.build_topology()
    if spec.topology == "hypercube":
        cells = topology.vertices()
    else:
        cells = [(r, c) for r in range(spec.mbr_rows) for c in range(spec.mbr_cols)]
    placements = []
    draws = 0
    while len(placements) < spec.samples:
        draws += 1
        if draws > MAX_DRAWS_PER_SAMPLE * spec.samples:
            raise CapabilityError(f"Only {len(placements)} of {spec.samples} random placements are gatherable",
                                  estimate=draws)
        k = rng.randint(2, spec.max_robots)
        counts: Dict[Vertex, int] = {}
        for _ in range(k):
            v = rng.choice(cells)
            if counts.get(v, 0) < spec.max_multiplicity:
                counts[v] = counts.get(v, 0) + 1
        if len(counts) < 2:
            continue
        if spec.topology == "grid":
            low_r = min(v[0] for v in counts)
            low_c = min(v[1] for v in counts)
            counts = {(v[0] - low_r, v[1] - low_c): n for v, n in counts.items()}
        if algorithm is not None and algorithm.ungatherable_witness(Configuration(topology, frozenset(counts))):
            continue
        placements.append(Placement.from_counts(counts))
    return placements


def enumerate_schedules(placement: Placement, policy: str, rng: Optional[random.Random] = None,
                        samples: int = 3) -> List[Schedule]:
    """Activation orders, deduplicated when they only relabel co-located robots."""
    k = placement.k
    if policy == "canonical":
        return [Schedule.identity(k)]
    if policy == "sampled":
        rng = rng or random.Random(0)
        return [Schedule.shuffled(k, rng.randrange(1 << 30)) for _ in range(samples)]
    positions = placement.robot_positions()
    seen = set()
    schedules = []
    for order in itertools.permutations(range(k)):
        signature = tuple(positions[r] for r in order)
        if signature not in seen:
            seen.add(signature)
            schedules.append(Schedule(order))
    return schedules


# ---------------------------------------------------------------------------
# Adversarial exploration
# ---------------------------------------------------------------------------

class InstanceExplorer:
    """Depth-first exploration of every resolver branch of one instance."""

    def __init__(self, topology: Topology, algorithm: GatheringAlgorithm, adversarial: bool = True,
                 state_budget: int = 500_000):
        self.topology = topology
        self.algorithm = algorithm
        self.adversarial = adversarial
        self.state_budget = state_budget
        self.pairs: Set[Pair] = set()
        self._labels: Dict[FrozenSet[Vertex], str] = {}

    def label(self, configuration: Configuration) -> str:
        cached = self._labels.get(configuration.occupied)
        if cached is None:
            cached = self.algorithm.classify(configuration) or GATHERED_LABEL
            self._labels[configuration.occupied] = cached
        return cached

    def _measure(self, configuration: Configuration) -> Optional[int]:
        measure = getattr(self.algorithm, "measure", None)
        return measure(configuration) if measure else None

    def _successors(self, state: State, schedule: Schedule) -> List[State]:
        positions, slot = state
        robot = schedule.order[slot]
        configuration = Configuration(self.topology, frozenset(positions))
        snapshot = Snapshot(configuration, positions[robot])
        offer = self.algorithm.offer(snapshot)
        validate_offer(offer, snapshot)
        choices = sorted(offer.destinations) if self.adversarial else [min(offer.destinations)]
        before = self.label(configuration)
        before_measure = self._measure(configuration)
        result = []
        for destination in choices:
            moved = positions[:robot] + (destination,) + positions[robot + 1:]
            after_config = Configuration(self.topology, frozenset(moved))
            after_measure = self._measure(after_config)
            trend = 0
            if before_measure is not None and after_measure != before_measure:
                trend = -1 if after_measure < before_measure else 1
            self.pairs.add((before, self.label(after_config), trend))
            result.append((moved, (slot + 1) % schedule.k))
        return result

    def explore(self, placement: Placement, schedule: Schedule) -> InstanceOutcome:
        """
        Worst and best number of rounds until a single vertex is occupied.

        Raises:
            _Abort: On an adversarial cycle, a move after gathering, a contract
                violation, a gathered run that skipped every nice star, or the
                state budget
        """
        root: State = (placement.robot_positions(), 0)
        memo: Dict[State, Tuple[int, int, bool]] = {}
        on_stack: Set[State] = set()
        stack: List[list] = [[root, None, []]]

        while stack:
            frame = stack[-1]
            state = frame[0]
            if frame[1] is None:
                positions = state[0]
                configuration = Configuration(self.topology, frozenset(positions))
                if configuration.is_gathered:
                    offer = self.algorithm.offer(Snapshot(configuration, positions[0]))
                    if not offer.is_nil(positions[0]):
                        raise _Abort("moves-after-gathering", "robots keep moving once gathered", state)
                    memo[state] = (0, 0, False)
                    stack.pop()
                    if stack:
                        stack[-1][2].append(memo[state])
                    continue
                if len(memo) + len(on_stack) > self.state_budget:
                    raise _Abort("state-budget", f"more than {self.state_budget} states", state)
                try:
                    frame[1] = self._successors(state, schedule)
                except ContractViolation as e:
                    raise _Abort("contract", str(e), state)
                on_stack.add(state)

            if frame[1]:
                child = frame[1].pop()
                if child in memo:
                    frame[2].append(memo[child])
                elif child in on_stack:
                    raise _Abort("cycle", "an adversarial branch revisits a state", child)
                else:
                    stack.append([child, None, []])
                continue

            on_stack.discard(state)
            stack.pop()
            children = frame[2]
            nice_here = bool(is_nice_star(Configuration(self.topology, frozenset(state[0]))))
            memo[state] = (
                1 + max(c[0] for c in children),
                1 + min(c[1] for c in children),
                nice_here or all(c[2] for c in children),
            )
            if stack:
                stack[-1][2].append(memo[state])

        worst, best, nice = memo[root]
        if len(placement.occupied) >= 3 and not nice:
            raise _Abort("nice-star", "a branch gathers without passing through a nice star", root)
        return InstanceOutcome(worst, best, len(memo))


def _scale(spec: SweepSpec, placement: Placement) -> int:
    if spec.topology == "hypercube":
        return spec.dimension
    rectangle = mbr(placement.occupied)
    return rectangle.rows + rectangle.columns


def _render_state(topology: Topology, state: Optional[State]) -> Optional[List[str]]:
    if state is None:
        return None
    return [topology.render_vertex(v) for v in state[0]] + [f"slot={state[1]}"]


def _run_chunk(args: Tuple[dict, str, List[int]]) -> SweepReport:
    spec_data, algorithm_name, indices = args
    spec = SweepSpec(**spec_data)
    topology = spec.build_topology()
    algorithm = build_algorithm(algorithm_name, topology)
    placements = enumerate_placements(spec, algorithm)
    explorer = InstanceExplorer(topology, algorithm, spec.resolver_policy == "adversarial", spec.state_budget)
    report = SweepReport()
    for index in indices:
        placement = placements[index]
        _check_instance(spec, topology, algorithm, explorer, placement, index, report)
    report.transition_pairs |= explorer.pairs
    return report


def _check_instance(spec: SweepSpec, topology: Topology, algorithm: GatheringAlgorithm,
                    explorer: InstanceExplorer, placement: Placement, index: int,
                    report: SweepReport) -> None:
    initial = Configuration(topology, placement.occupied)
    counts = {topology.render_vertex(v): n for v, n in placement.counts}
    schedules = enumerate_schedules(placement, spec.schedule_policy,
                                    random.Random(spec.seed * 1_000_003 + index), spec.schedule_samples)
    if algorithm.ungatherable_witness(initial):
        report.instances += len(schedules)
        report.rejected += len(schedules)
        return
    horizon_rounds = spec.horizon_epochs * placement.k
    bound = epochs_lower_bound(initial)
    for schedule in schedules:
        report.instances += 1
        try:
            outcome = explorer.explore(placement, schedule)
        except _Abort as e:
            report.violations.append(Violation(e.kind, str(e), counts, schedule.order,
                                               _render_state(topology, e.state)))
            continue
        report.states_explored += outcome.states
        if outcome.worst_rounds > horizon_rounds:
            report.violations.append(Violation(
                "horizon", f"worst branch needs {outcome.worst_rounds} rounds", counts, schedule.order))
            continue
        report.gathered += 1
        worst_epochs = math.ceil(outcome.worst_rounds / placement.k)
        best_epochs = math.ceil(outcome.best_rounds / placement.k)
        report.max_epochs = max(report.max_epochs, worst_epochs)
        report.epoch_ratio = max(report.epoch_ratio, worst_epochs / _scale(spec, placement))
        report.lower_bound_checked += 1
        if best_epochs < bound:
            report.violations.append(Violation(
                "lower-bound", f"gathered in {best_epochs} epochs, below {bound}", counts, schedule.order))
        if len(placement.occupied) >= 3:
            report.nice_star_checked += 1


class SweepRunner(LoggerMixin):
    """Drives a sweep, optionally across worker processes."""

    def __init__(self, log_level: str = "INFO", log_dir: str = "logs"):
        self.setup_logging(log_level, log_dir)

    @log_function_call(logger, slow_after=30.0)
    def run(self, spec: SweepSpec, algorithm_name: str = "auto", workers: int = 1) -> SweepReport:
        topology = spec.build_topology()
        algorithm = build_algorithm(algorithm_name, topology)
        placements = enumerate_placements(spec, algorithm)
        per_placement = {"all": math.factorial(spec.max_robots), "sampled": spec.schedule_samples}
        estimate = len(placements) * per_placement.get(spec.schedule_policy, 1)
        if len(placements) > spec.max_instances:
            raise CapabilityError("Sweep exceeds the instance limit", estimate=estimate)
        self.log_info(f"Sweeping {len(placements)} placements on {spec.topology} with {algorithm.name}")

        report = SweepReport()
        if workers > 1:
            chunks = [list(range(i, len(placements), workers)) for i in range(workers)]
            with Pool(workers) as pool:
                for partial in pool.imap(_run_chunk, [(spec.model_dump(), algorithm_name, c) for c in chunks]):
                    report.merge(partial)
        else:
            explorer = InstanceExplorer(topology, algorithm, spec.resolver_policy == "adversarial",
                                        spec.state_budget)
            for index, placement in enumerate(placements):
                _check_instance(spec, topology, algorithm, explorer, placement, index, report)
                if report.instances > spec.max_instances:
                    raise CapabilityError("Sweep exceeds the instance limit", estimate=estimate)
                self.log_progress(index + 1, len(placements), f"placements, {len(report.violations)} violations")
            report.transition_pairs |= explorer.pairs

        for violation in report.violations:
            self.log_warning(f"{violation.kind}: {violation.message} {violation.counts} {violation.schedule}")
        self.log_info(f"Sweep done: {report.instances} instances, {report.gathered} gathered, "
                      f"{report.rejected} rejected, {len(report.violations)} violations")
        return report


def sweep(spec: SweepSpec, algorithm: str = "auto", workers: int = 1, log_dir: str = "logs") -> SweepReport:
    return SweepRunner(log_dir=log_dir).run(spec, algorithm, workers)


# ---------------------------------------------------------------------------
# Trace checks
# ---------------------------------------------------------------------------

def check_transitions(steps: Sequence[TraceStep], expected: Mapping[str, FrozenSet[str]],
                      measure: Optional[Callable[[Configuration], int]] = None) -> CheckResult:
    """
    Every consecutive pair of task labels must be expected.

    A self pair is accepted when the table lists it or the occupied set did
    not change; with a measure, any pair across which the measure strictly
    drops is accepted too.
    """
    for before, after in zip(steps, steps[1:]):
        src, dst = before.task, after.task
        if src is None or dst is None or dst in expected.get(src, frozenset()):
            continue
        if src == dst and after.configuration.occupied == before.configuration.occupied:
            continue
        if measure and measure(after.configuration) < measure(before.configuration):
            continue
        return CheckResult(False, f"unexpected transition {src} -> {dst} at round {after.round}",
                           witness=(src, dst))
    return CheckResult(True, f"{max(len(steps) - 1, 0)} transitions conform")


def unexpected_pairs(pairs: Iterable[Pair], expected: Mapping[str, FrozenSet[str]],
                     wildcard_on_drop: bool = True) -> List[Pair]:
    """Observed (source, target, measure trend) pairs outside the expected table."""
    bad = []
    for src, dst, trend in sorted(pairs):
        if src == dst or dst in expected.get(src, frozenset()):
            continue
        if wildcard_on_drop and trend < 0:
            continue
        bad.append((src, dst, trend))
    return bad


def task_cycles(pairs: Iterable[Pair]) -> List[Tuple[str, ...]]:
    """Simple multi-task cycles among pairs that keep the measure unchanged."""
    graph = nx.DiGraph()
    graph.add_edges_from((src, dst) for src, dst, trend in pairs if trend == 0 and src != dst)
    cycles = []
    for cycle in nx.simple_cycles(graph):
        start = cycle.index(min(cycle))
        cycles.append(tuple(cycle[start:] + cycle[:start]))
    return sorted(cycles)


def check_lower_bound(result: RunResult) -> CheckResult:
    if not result.gathered:
        return CheckResult(True, "skipped: run did not gather", skipped=True)
    if result.epochs_used < result.lower_bound:
        return CheckResult(False, f"gathered in {result.epochs_used} epochs, below {result.lower_bound}",
                           witness=result.epochs_used)
    return CheckResult(True, f"{result.epochs_used} >= {result.lower_bound}")


def check_round_robin_fairness(steps: Sequence[TraceStep], schedule: Schedule) -> CheckResult:
    for index, step in enumerate(steps):
        if step.round != index + 1:
            return CheckResult(False, f"round {step.round} out of sequence", witness=index)
        if step.robot != schedule.robot_at(step.round):
            return CheckResult(False, f"robot {step.robot} activated out of order at round {step.round}",
                               witness=index)
    for start in range(0, len(steps) - schedule.k + 1, schedule.k):
        block = [s.robot for s in steps[start:start + schedule.k]]
        if sorted(block) != list(range(schedule.k)):
            return CheckResult(False, f"epoch starting at round {start + 1} is not a permutation", witness=start)
    return CheckResult(True, f"{len(steps)} rounds follow the schedule")


def check_atomicity(steps: Sequence[TraceStep]) -> CheckResult:
    """Consecutive placements differ by one robot crossing at most one edge."""
    for before, after in zip(steps, steps[1:]):
        topology = before.configuration.topology
        if before.moved and before.destination not in topology.neighbors(before.active_vertex):
            return CheckResult(False, f"round {before.round} jumps more than one edge", witness=before.round)
        counts = before.placement.as_dict()
        counts[before.active_vertex] -= 1
        counts[before.destination] = counts.get(before.destination, 0) + 1
        if Placement.from_counts(counts) != after.placement:
            return CheckResult(False, f"round {before.round} changes more than the active robot",
                               witness=before.round)
    return CheckResult(True, f"{len(steps)} rounds are atomic")


def _grid_group() -> List[GridAutomorphism]:
    shifts = [(0, 0), (3, -2), (-5, 7)]
    return [GridAutomorphism(matrix, shift) for matrix in DIHEDRAL_MATRICES for shift in shifts]


def equivariance_check(algorithm: GatheringAlgorithm, topology: Topology,
                       samples: Iterable[Tuple[FrozenSet[Vertex], Vertex]],
                       group: Optional[list] = None) -> CheckResult:
    """Offers must commute with every automorphism: offer(a(s)) = a(offer(s))."""
    if group is None:
        group = list(topology.automorphisms()) if isinstance(topology, Hypercube) else _grid_group()
    checked = 0
    for occupied, position in samples:
        occupied = frozenset(occupied)
        base = algorithm.offer(Snapshot(Configuration(topology, occupied), position)).destinations
        for element in group:
            image = element.apply_set(occupied)
            moved = algorithm.offer(Snapshot(Configuration(topology, image), element.apply(position))).destinations
            if moved != element.apply_set(base):
                return CheckResult(False, f"offer at {position!r} is not equivariant",
                                   witness=(sorted(occupied), position, element))
            checked += 1
    if not checked:
        raise InputError("Equivariance check needs at least one sample")
    return CheckResult(True, f"{checked} snapshot images agree")


# ---------------------------------------------------------------------------
# Table certification
# ---------------------------------------------------------------------------

@dataclass
class TableCertificateReport:
    table: str
    clauses: Dict[str, bool] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    class_count: int = 0
    max_depth: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, clause: str, ok: bool, detail: str = "") -> None:
        self.clauses[clause] = self.clauses.get(clause, True) and ok
        if not ok:
            self.failures.append(f"{clause}: {detail}" if detail else clause)

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "clauses": self.clauses,
            "failures": self.failures,
            "class_count": self.class_count,
            "max_depth": self.max_depth,
            "passed": self.passed,
        }


# None: bounded only by the number of classes
DEPTH_BOUNDS: Dict[str, Optional[int]] = {"q3": 9, "grid": None}
U_ENTRY_LABELS = {"q3": frozenset({"2.2", "3.3"}), "grid": frozenset()}
# Class from which one activation per robot must finish gathering
ONE_EPOCH_LABELS: Dict[str, Optional[str]] = {"q3": "2.2", "grid": None}
ONE_EPOCH_MAX_ROBOTS = 6


def _epoch_failure(table: MoveTable, positions: Tuple[Vertex, ...], order: Sequence[int]) -> Optional[str]:
    frontier = {positions}
    for robot in order:
        following = set()
        for state in frontier:
            destinations = table.lookup(state, state[robot])
            if destinations is None:
                return f"{sorted(set(state))} leaves the table"
            for target in destinations or {state[robot]}:
                following.add(state[:robot] + (target,) + state[robot + 1:])
        frontier = following
    spread = sorted(sorted(set(state)) for state in frontier if len(set(state)) > 1)
    return f"still spread over {spread[0]}" if spread else None


def one_epoch_failure(table: MoveTable, label: str, max_robots: int = ONE_EPOCH_MAX_ROBOTS) -> Optional[str]:
    """
    Replay one epoch from the class with `label` using the table's own offers.

    Every split of up to max_robots robots over the class pattern, every
    activation order and every offered choice must end on one vertex.
    Returns a description of the first failure, or None.
    """
    entry = next((e for e in table.entries.values() if e.label == label), None)
    if entry is None:
        return f"no class labelled {label}"
    pattern = sorted(entry.pattern)
    for total in range(len(pattern), max_robots + 1):
        for counts in _compositions(total, len(pattern), total):
            placement = Placement.from_counts(dict(zip(pattern, counts)))
            for schedule in enumerate_schedules(placement, "all"):
                failure = _epoch_failure(table, placement.robot_positions(), schedule.order)
                if failure:
                    return f"{label} with counts {list(counts)}, order {list(schedule.order)}: {failure}"
    return None


def class_graph(table: MoveTable) -> nx.DiGraph:
    graph = nx.DiGraph()
    for key, entry in table.entries.items():
        if not entry.excluded:
            graph.add_node(key)
    for transition in table.transitions():
        if not transition.is_self_loop:
            graph.add_edge(transition.source, transition.target, kind=transition.kind)
    return graph


def _ungatherable(kind: str, topology: Topology, pattern: FrozenSet[Vertex]) -> bool:
    configuration = Configuration(topology, pattern)
    if kind == "q3":
        return uh_witness(configuration) is not UHWitness.NONE
    return ust_witness(configuration) is not USTWitness.NONE


@log_function_call(logger)
def certify_table(table: MoveTable, kind: str, strict: bool = True) -> TableCertificateReport:
    """
    Check acyclicity, occupancy monotonicity, ungatherable-set discipline,
    depth bound and terminal reachability of a move table, plus the
    one-epoch finish from the Q3 table's 2.2 class.

    Raises:
        CertificationError: If strict and any clause fails
    """
    if kind not in DEPTH_BOUNDS:
        raise InputError(f"Unknown table kind '{kind}'")
    report = TableCertificateReport(table.name, class_count=len(table))
    graph = class_graph(table)
    entries = table.entries

    acyclic = nx.is_directed_acyclic_graph(graph)
    detail = ""
    if not acyclic:
        cycle = nx.find_cycle(graph)
        detail = " -> ".join(entries[u].label for u, _ in cycle)
    report.record("acyclic", acyclic, detail)

    for t in table.transitions():
        source, target = entries[t.source], entries.get(t.target)
        if target is None:
            report.record("closed", False, f"{source.label} leaves the table")
            continue
        if t.kind == "solid":
            report.record("monotonic", target.occ <= source.occ, f"solid {source.label} -> {target.label}")
        else:
            ok = t.is_self_loop or target.occ == source.occ + 1
            report.record("monotonic", ok, f"dashed {source.label} -> {target.label}")
        if not t.is_self_loop and _ungatherable(kind, table.topology, target.pattern):
            allowed = source.label in U_ENTRY_LABELS[kind]
            report.record("ungatherable-discipline", allowed, f"{source.label} -> {target.label}")
    report.clauses.setdefault("monotonic", True)
    report.clauses.setdefault("ungatherable-discipline", True)
    report.clauses.setdefault("closed", True)

    if acyclic:
        report.max_depth = nx.dag_longest_path_length(graph)
        bound = DEPTH_BOUNDS[kind]
        if bound is None:
            bound = len(table) - 1
        report.record("depth", report.max_depth <= bound, f"longest path {report.max_depth} > {bound}")

    terminals = {k for k, e in entries.items() if e.terminal}
    for key, entry in entries.items():
        if entry.excluded or entry.terminal:
            continue
        reaches = key in graph and bool(nx.descendants(graph, key) & terminals)
        report.record("reaches-terminal", reaches, entry.label)
    report.clauses.setdefault("reaches-terminal", True)

    label = ONE_EPOCH_LABELS[kind]
    if label is not None:
        failure = one_epoch_failure(table, label)
        report.record("one-epoch-finish", failure is None, failure or "")

    if kind == "grid":
        diagonal = all(
            mbr(entries[k].pattern).shape == (2, 2) and entries[k].occ == 2 for k in terminals
        ) and bool(terminals)
        report.record("terminal-diagonal", diagonal)

    if strict and not report.passed:
        raise CertificationError(report)
    return report


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def export_class_graph(table: MoveTable) -> str:
    """Class transition graph; dashed edges come from movers leaving a multiplicity."""
    lines = [f'digraph "{table.name}" {{']
    for entry in table.entries.values():
        shape = "doublecircle" if entry.terminal else "box" if entry.excluded else "ellipse"
        lines.append(f'  "{entry.label}" [shape={shape}, tooltip="{table.render_key(entry.key)}"];')
    for t in sorted(table.transitions(), key=lambda t: (table.entries[t.source].label, t.kind, str(t.target))):
        if t.is_self_loop or t.target not in table.entries:
            continue
        lines.append(f'  "{table.entries[t.source].label}" -> "{table.entries[t.target].label}" [style={t.kind}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_task_graph(transitions: Mapping[str, Iterable[str]], name: str = "tasks") -> str:
    lines = [f'digraph "{name}" {{']
    for src in sorted(transitions):
        for dst in sorted(transitions[src]):
            if dst != src:
                lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
