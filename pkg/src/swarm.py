"""
Execution engine for anonymous, oblivious robots on a graph.

Placements keep hidden multiplicities; snapshots expose only the occupied
set and the active robot's own vertex. Robots are activated one at a time
in a fixed Round-Robin order chosen before the first round.
"""

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import ContractViolation, InputError, UngatherableInitialError
from topology import Topology, Vertex
from utils.logger import LoggerMixin


GATHERED_LABEL = "GATHERED"


@dataclass(frozen=True)
class Placement:
    """Robot counts per vertex, sorted by vertex, zero counts dropped."""
    counts: Tuple[Tuple[Vertex, int], ...]

    @classmethod
    def from_counts(cls, mapping: Mapping[Vertex, int]) -> "Placement":
        items = []
        for vertex, count in mapping.items():
            if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                raise InputError(f"Robot count for {vertex!r} must be a non-negative integer, got {count!r}")
            if count:
                items.append((vertex, count))
        if not items:
            raise InputError("A placement needs at least one robot")
        return cls(tuple(sorted(items)))

    @classmethod
    def from_positions(cls, positions: Iterable[Vertex]) -> "Placement":
        counts: Dict[Vertex, int] = {}
        for vertex in positions:
            counts[vertex] = counts.get(vertex, 0) + 1
        return cls.from_counts(counts)

    @property
    def k(self) -> int:
        return sum(count for _, count in self.counts)

    @property
    def occupied(self) -> FrozenSet[Vertex]:
        return frozenset(vertex for vertex, _ in self.counts)

    def as_dict(self) -> Dict[Vertex, int]:
        return dict(self.counts)

    def count_at(self, vertex: Vertex) -> int:
        return self.as_dict().get(vertex, 0)

    def robot_positions(self) -> Tuple[Vertex, ...]:
        """Robot index -> vertex, robots numbered from 0 in sorted vertex order."""
        return tuple(vertex for vertex, count in self.counts for _ in range(count))


@dataclass(frozen=True)
class Schedule:
    """A fixed Round-Robin activation order over robots 0..k-1."""
    order: Tuple[int, ...]

    def __post_init__(self):
        if not self.order or sorted(self.order) != list(range(len(self.order))):
            raise InputError(f"Schedule {self.order!r} is not a permutation of 0..k-1")

    @classmethod
    def identity(cls, k: int) -> "Schedule":
        return cls(tuple(range(k)))

    @classmethod
    def shuffled(cls, k: int, seed: Optional[int] = None) -> "Schedule":
        order = list(range(k))
        random.Random(seed).shuffle(order)
        return cls(tuple(order))

    @property
    def k(self) -> int:
        return len(self.order)

    def _check_round(self, round_number: int) -> None:
        if round_number < 1:
            raise InputError(f"Rounds are numbered from 1, got {round_number}")

    def robot_at(self, round_number: int) -> int:
        self._check_round(round_number)
        return self.order[(round_number - 1) % self.k]

    def position_of(self, round_number: int) -> int:
        self._check_round(round_number)
        return (round_number - 1) % self.k

    def epoch_of(self, round_number: int) -> int:
        self._check_round(round_number)
        return (round_number + self.k - 1) // self.k


@dataclass(frozen=True)
class Configuration:
    """The occupancy function of a topology: which vertices hold at least one robot."""
    topology: Topology
    occupied: FrozenSet[Vertex]

    def __post_init__(self):
        if not self.occupied:
            raise InputError("A configuration needs at least one occupied vertex")

    @property
    def occ(self) -> int:
        return len(self.occupied)

    @cached_property
    def delta(self) -> int:
        return self.topology.diameter_of(self.occupied)

    @property
    def is_gathered(self) -> bool:
        return self.occ == 1

    def is_occupied(self, vertex: Vertex) -> bool:
        return vertex in self.occupied


@dataclass(frozen=True)
class Snapshot:
    """What an active robot perceives: the configuration and its own vertex."""
    configuration: Configuration
    position: Vertex

    def __post_init__(self):
        if self.position not in self.configuration.occupied:
            raise InputError(f"Active vertex {self.position!r} is not occupied")

    @property
    def topology(self) -> Topology:
        return self.configuration.topology


@dataclass(frozen=True)
class MoveOffer:
    """Admissible destinations for the active robot; its own vertex means nil."""
    destinations: FrozenSet[Vertex]
    task: Optional[str] = None

    def __post_init__(self):
        if not self.destinations:
            raise ContractViolation("Move offer must contain at least one destination")

    @classmethod
    def nil(cls, position: Vertex, task: Optional[str] = None) -> "MoveOffer":
        return cls(frozenset({position}), task)

    @classmethod
    def to(cls, destinations: Iterable[Vertex], position: Vertex, task: Optional[str] = None) -> "MoveOffer":
        """Offer the given destinations, or nil when there are none."""
        destinations = frozenset(destinations)
        return cls(destinations or frozenset({position}), task)

    def is_nil(self, position: Vertex) -> bool:
        return self.destinations == frozenset({position})


def validate_offer(offer: MoveOffer, snapshot: Snapshot) -> None:
    """Fail fast when an offer leaves the one-edge movement rule."""
    allowed = snapshot.topology.neighbors(snapshot.position) | {snapshot.position}
    stray = offer.destinations - allowed
    if stray:
        rendered = ", ".join(sorted(snapshot.topology.render_vertex(v) for v in stray))
        raise ContractViolation(
            f"Offer from {snapshot.topology.render_vertex(snapshot.position)} "
            f"contains non-adjacent destinations: {rendered}"
        )


class GatheringAlgorithm(ABC):
    """A deterministic, multiplicity-blind gathering algorithm."""

    name: str = "abstract"

    @abstractmethod
    def offer(self, snapshot: Snapshot) -> MoveOffer:
        """Destinations for the robot at snapshot.position."""

    def classify(self, configuration: Configuration) -> Optional[str]:
        """Task label of a configuration, None once gathered."""
        return None

    def ungatherable_witness(self, configuration: Configuration) -> Optional[str]:
        """Name of the ungatherable family the configuration belongs to, if any."""
        return None


class Resolver(ABC):
    """Closes the choice among several offered destinations."""

    kind: str = "abstract"
    deterministic: bool = True

    @abstractmethod
    def choose(self, offer: MoveOffer, snapshot: Snapshot, robot: int) -> Vertex:
        pass


class CanonicalResolver(Resolver):
    """Picks the destination with the smallest encoding."""

    kind = "canonical"

    def choose(self, offer: MoveOffer, snapshot: Snapshot, robot: int) -> Vertex:
        return min(offer.destinations)


class SeededRandomResolver(Resolver):
    kind = "random"
    deterministic = False

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, offer: MoveOffer, snapshot: Snapshot, robot: int) -> Vertex:
        return self._rng.choice(sorted(offer.destinations))


class ScriptedResolver(Resolver):
    """Sends the robot at x to the scripted successor of x whenever it is offered."""

    kind = "scripted"

    def __init__(self, successors: Mapping[Vertex, Vertex]):
        self.successors = dict(successors)

    def choose(self, offer: MoveOffer, snapshot: Snapshot, robot: int) -> Vertex:
        target = self.successors.get(snapshot.position)
        if target is not None and target in offer.destinations:
            return target
        return min(offer.destinations)


def make_resolver(kind: str, seed: Optional[int] = None) -> Resolver:
    if kind == "canonical":
        return CanonicalResolver()
    if kind == "random":
        return SeededRandomResolver(seed)
    raise InputError(f"Unknown resolver '{kind}' (expected canonical or random)")


@dataclass(frozen=True)
class TraceStep:
    """One round: the pre-move state and the move the active robot made."""
    round: int
    epoch: int
    robot: int
    placement: Placement
    configuration: Configuration
    active_vertex: Vertex
    destination: Vertex
    task: Optional[str] = None

    @property
    def occ(self) -> int:
        return self.configuration.occ

    @property
    def delta(self) -> int:
        return self.configuration.delta

    @property
    def moved(self) -> bool:
        return self.destination != self.active_vertex

    def to_record(self) -> Dict[str, object]:
        render = self.configuration.topology.render_vertex
        return {
            "round": self.round,
            "epoch": self.epoch,
            "robot": self.robot,
            "active_vertex": render(self.active_vertex),
            "destination": render(self.destination),
            "occ": self.occ,
            "delta": self.delta,
            "task": self.task,
        }


@dataclass(frozen=True)
class RecurrenceCertificate:
    """
    A finite witness of an infinite execution.

    Starting from `positions` at `loop_start_round`, replaying `moves` under the
    schedule returns to the same positions at the same schedule position.
    """
    positions: Tuple[Vertex, ...]
    schedule: Schedule
    schedule_position: int
    loop_start_round: int
    span: int
    moves: Tuple[Tuple[int, Vertex, Vertex], ...]

    def replay(self) -> Tuple[Vertex, ...]:
        """Positions after applying every move of the loop."""
        positions = list(self.positions)
        for offset, (robot, source, target) in enumerate(self.moves):
            if self.schedule.robot_at(self.loop_start_round + offset) != robot:
                raise ContractViolation(f"Certificate move {offset} activates robot {robot} out of order")
            if positions[robot] != source:
                raise ContractViolation(f"Certificate move {offset} starts robot {robot} at the wrong vertex")
            positions[robot] = target
        return tuple(positions)

    def verify(self, topology: Optional[Topology] = None, algorithm: Optional[GatheringAlgorithm] = None) -> bool:
        """
        Check the loop closes and, optionally, that every move was offered.

        Args:
            topology: Needed together with algorithm to re-derive offers
            algorithm: Algorithm whose offers must contain each recorded move

        Returns:
            True if the certificate is consistent
        """
        if self.span != len(self.moves) or self.span % self.schedule.k != 0:
            return False
        try:
            if self.replay() != self.positions:
                return False
        except ContractViolation:
            return False
        if topology is not None and algorithm is not None:
            positions = list(self.positions)
            for robot, source, target in self.moves:
                snapshot = Snapshot(Configuration(topology, frozenset(positions)), source)
                if target not in algorithm.offer(snapshot).destinations:
                    return False
                positions[robot] = target
        return True


class Verdict(Enum):
    GATHERED = "gathered"
    HORIZON_EXHAUSTED = "horizon-exhausted"
    RECURRENCE_DETECTED = "recurrence-detected"


@dataclass
class RunResult:
    verdict: Verdict
    trace: List[TraceStep]
    initial_placement: Placement
    final_positions: Tuple[Vertex, ...]
    schedule: Schedule
    rounds: int
    epochs_used: Optional[int] = None
    certificate: Optional[RecurrenceCertificate] = None
    lower_bound: int = 0

    @property
    def final_placement(self) -> Placement:
        return Placement.from_positions(self.final_positions)

    @property
    def gathered(self) -> bool:
        return self.verdict is Verdict.GATHERED


def is_nice_star(configuration: Configuration) -> List[Vertex]:
    """
    Centers of a nice-star configuration.

    A center is an unoccupied vertex adjacent to every occupied vertex.
    Returns all centers in sorted order, empty when there are none.
    """
    if configuration.occ < 2:
        return []
    topology = configuration.topology
    candidates = None
    for vertex in configuration.occupied:
        around = topology.neighbors(vertex)
        candidates = around if candidates is None else candidates & around
        if not candidates:
            return []
    return sorted(candidates - configuration.occupied)


def epochs_lower_bound(configuration: Configuration) -> int:
    """Per-instance lower bound ceil(delta / 2) on gathering epochs."""
    return (configuration.delta + 1) // 2


class SwarmEngine(LoggerMixin):
    """Runs one algorithm on one topology under Round-Robin activation."""

    def __init__(
        self,
        topology: Topology,
        algorithm: GatheringAlgorithm,
        resolver: Optional[Resolver] = None,
        log_level: str = "INFO",
        log_dir: str = "logs",
    ):
        self.topology = topology
        self.algorithm = algorithm
        self.resolver = resolver or CanonicalResolver()
        self.setup_logging(log_level, log_dir)

    def snapshot_of(self, placement: Placement, active_robot: int) -> Snapshot:
        positions = placement.robot_positions()
        if not isinstance(active_robot, int) or not 0 <= active_robot < len(positions):
            raise InputError(f"Robot index {active_robot!r} out of range for k={len(positions)}")
        return Snapshot(Configuration(self.topology, placement.occupied), positions[active_robot])

    def step(
        self,
        positions: Sequence[Vertex],
        schedule: Schedule,
        round_number: int,
    ) -> Tuple[Tuple[Vertex, ...], TraceStep]:
        """
        Execute one Look-Compute-Move cycle of the scheduled robot.

        Args:
            positions: Robot index -> vertex before the round
            schedule: Activation order
            round_number: Round being executed, from 1

        Returns:
            New positions and the trace step of the round
        """
        positions = tuple(positions)
        if len(positions) != schedule.k:
            raise InputError(f"Schedule covers {schedule.k} robots but {len(positions)} are placed")
        robot = schedule.robot_at(round_number)
        vertex = positions[robot]
        configuration = Configuration(self.topology, frozenset(positions))
        snapshot = Snapshot(configuration, vertex)

        offer = self.algorithm.offer(snapshot)
        validate_offer(offer, snapshot)
        if len(offer.destinations) == 1:
            destination = next(iter(offer.destinations))
        else:
            destination = self.resolver.choose(offer, snapshot, robot)
            if destination not in offer.destinations:
                raise ContractViolation(f"Resolver chose {destination!r} outside the offer")

        task = GATHERED_LABEL if configuration.is_gathered else offer.task
        trace_step = TraceStep(
            round=round_number,
            epoch=schedule.epoch_of(round_number),
            robot=robot,
            placement=Placement.from_positions(positions),
            configuration=configuration,
            active_vertex=vertex,
            destination=destination,
            task=task,
        )
        if self.debug_enabled:
            render = self.topology.render_vertex
            self.log_debug(f"round {round_number} robot {robot} [{task}] {render(vertex)} -> {render(destination)}")
        moved = positions[:robot] + (destination,) + positions[robot + 1:]
        return moved, trace_step

    def run(
        self,
        placement: Placement,
        schedule: Schedule,
        max_epochs: int,
        enforce_initial: bool = True,
    ) -> RunResult:
        """
        Run until gathering is verified, a state recurs or the horizon is reached.

        Gathering is reported only after occ = 1 held for k consecutive nil
        rounds. The horizon is max_epochs plus one verification epoch.
        Recurrence is keyed on (robot positions, schedule position) and is
        only checked under deterministic resolvers.
        """
        if not isinstance(max_epochs, int) or max_epochs < 1:
            raise InputError(f"max_epochs must be a positive integer, got {max_epochs!r}")
        positions = placement.robot_positions()
        k = len(positions)
        if schedule.k != k:
            raise InputError(f"Schedule covers {schedule.k} robots but the placement has {k}")
        for vertex in placement.occupied:
            self.topology.validate_vertex(vertex)

        initial = Configuration(self.topology, placement.occupied)
        if enforce_initial:
            witness = self.algorithm.ungatherable_witness(initial)
            if witness:
                raise UngatherableInitialError(witness)

        trace: List[TraceStep] = []
        gathered_round = 0 if initial.is_gathered else None
        quiet = 0
        seen: Dict[Tuple[Tuple[Vertex, ...], int], int] = {}
        horizon = (max_epochs + 1) * k
        result = RunResult(
            verdict=Verdict.HORIZON_EXHAUSTED,
            trace=trace,
            initial_placement=placement,
            final_positions=positions,
            schedule=schedule,
            rounds=0,
            lower_bound=epochs_lower_bound(initial),
        )

        for round_number in range(1, horizon + 1):
            if self.resolver.deterministic:
                key = (positions, (round_number - 1) % k)
                if key in seen:
                    start = seen[key]
                    result.verdict = Verdict.RECURRENCE_DETECTED
                    result.certificate = RecurrenceCertificate(
                        positions=positions,
                        schedule=schedule,
                        schedule_position=key[1],
                        loop_start_round=start,
                        span=round_number - start,
                        moves=tuple((s.robot, s.active_vertex, s.destination) for s in trace[start - 1:]),
                    )
                    break
                seen[key] = round_number

            positions, trace_step = self.step(positions, schedule, round_number)
            trace.append(trace_step)
            result.rounds = round_number
            result.final_positions = positions

            if len(set(positions)) == 1:
                if trace_step.moved:
                    gathered_round, quiet = round_number, 0
                else:
                    quiet += 1
            else:
                gathered_round, quiet = None, 0

            if gathered_round is not None and quiet >= k:
                result.verdict = Verdict.GATHERED
                result.epochs_used = 0 if gathered_round == 0 else schedule.epoch_of(gathered_round)
                break

        self.log_info(
            f"{self.algorithm.name}: {result.verdict.value} after {result.rounds} rounds"
            + (f" ({result.epochs_used} epochs)" if result.epochs_used is not None else "")
        )
        return result
