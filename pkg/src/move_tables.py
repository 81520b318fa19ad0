"""
Certified move tables for small endgame patterns.

A move table assigns, to every automorphism class of occupancy patterns, the
destinations offered to robots at each vertex of the class's canonical
pattern. Tables are synthesized by minimum-depth relaxation: a class is
solved by a plan whose single-robot successors (both when the mover was alone
and when it left a multiplicity) are admissible classes of smaller depth.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Tuple

from errors import InputError, SynthesisError
from topology import Topology, Vertex
from utils.logger import log_function_call, setup_logger


logger = setup_logger(__name__)

INFINITY = float("inf")


@dataclass(frozen=True)
class Transition:
    """Class-level effect of one move.

    kind is "solid" when the mover was alone on its vertex and "dashed" when
    it left a multiplicity; a dashed move onto an occupied vertex is a self-loop.
    """
    kind: str
    source: Hashable
    target: Hashable

    @property
    def is_self_loop(self) -> bool:
        return self.source == self.target


@dataclass
class ClassEntry:
    key: Hashable
    pattern: FrozenSet[Vertex]
    label: str = ""
    moves: Dict[Vertex, FrozenSet[Vertex]] = field(default_factory=dict)
    depth: Optional[int] = None
    fixed: bool = False
    terminal: bool = False
    excluded: bool = False
    transitions: Tuple[Transition, ...] = ()

    @property
    def occ(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class FixedEntry:
    """A hand-specified class given on any representative pattern."""
    representative: FrozenSet[Vertex]
    label: str
    depth: Optional[int]
    moves: Mapping[Vertex, Iterable[Vertex]] = field(default_factory=dict)
    terminal: bool = False
    excluded: bool = False


@dataclass(frozen=True)
class Plan:
    movers: Tuple[Vertex, ...]
    targets: Tuple[Vertex, ...]
    solid: Hashable
    dashed: Optional[Hashable]
    moves: Tuple[Tuple[Vertex, FrozenSet[Vertex]], ...]


def orbits(vertices: Iterable[Vertex], group: list) -> List[Tuple[Vertex, ...]]:
    """Partition vertices into orbits, each sorted, ordered by smallest member."""
    remaining = sorted(set(vertices))
    pool = set(remaining)
    result = []
    for v in remaining:
        if v not in pool:
            continue
        orbit = sorted({g.apply(v) for g in group} & pool)
        pool.difference_update(orbit)
        result.append(tuple(orbit))
    return result


def successors(pattern: FrozenSet[Vertex], mover: Vertex, target: Vertex) -> Tuple[FrozenSet[Vertex], Optional[FrozenSet[Vertex]]]:
    """Patterns after `mover` steps to `target`: alone (solid) and from a multiplicity (dashed, None for a self-loop)."""
    if target in pattern:
        return pattern - {mover}, None
    return (pattern - {mover}) | {target}, pattern | {target}


class MoveTable:
    """Lookup structure over synthesized class entries."""

    def __init__(self, name: str, topology: Topology, entries: Dict[Hashable, ClassEntry]):
        self.name = name
        self.topology = topology
        self.entries = dict(sorted(entries.items()))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: Hashable) -> bool:
        return key in self.entries

    def entry_for(self, occupied: Iterable[Vertex]) -> Optional[ClassEntry]:
        key = self.topology.canonical_form(frozenset(occupied))
        return self.entries.get(key)

    def label_of(self, occupied: Iterable[Vertex]) -> Optional[str]:
        entry = self.entry_for(occupied)
        return entry.label if entry else None

    def lookup(self, occupied: Iterable[Vertex], vertex: Vertex) -> Optional[FrozenSet[Vertex]]:
        """
        Destinations for the robot at `vertex`, in the caller's coordinates.

        Returns None when the pattern's class is not in the table, and an
        empty set when the robot is not a designated mover.
        """
        occupied = frozenset(occupied)
        if vertex not in occupied:
            raise InputError(f"Vertex {vertex!r} is not occupied")
        key, element, _ = self.topology.canonical_pattern(occupied)
        entry = self.entries.get(key)
        if entry is None:
            return None
        destinations = entry.moves.get(element.apply(vertex), frozenset())
        back = element.inverse()
        return frozenset(back.apply(w) for w in destinations)

    @property
    def max_depth(self) -> int:
        return max((e.depth for e in self.entries.values() if e.depth is not None), default=0)

    def synthesized(self) -> List[ClassEntry]:
        return [e for e in self.entries.values() if not e.fixed]

    def transitions(self) -> List[Transition]:
        return [t for e in self.entries.values() for t in e.transitions]

    def render_key(self, key: Hashable) -> str:
        entry = self.entries[key]
        return "{" + ",".join(self.topology.render_vertex(v) for v in sorted(entry.pattern)) + "}"

    def to_records(self) -> Dict[str, dict]:
        render = self.topology.render_vertex
        records = {}
        for key, entry in self.entries.items():
            records[entry.label] = {
                "pattern": [render(v) for v in sorted(entry.pattern)],
                "depth": entry.depth,
                "fixed": entry.fixed,
                "terminal": entry.terminal,
                "excluded": entry.excluded,
                "moves": {
                    render(v): sorted(render(w) for w in targets)
                    for v, targets in sorted(entry.moves.items())
                },
                "successors": sorted({self.entries[t.target].label for t in entry.transitions
                                      if t.target in self.entries and not t.is_self_loop}),
            }
        return records


def _entry_transitions(topology: Topology, key: Hashable, pattern: FrozenSet[Vertex],
                       moves: Mapping[Vertex, FrozenSet[Vertex]]) -> Tuple[Transition, ...]:
    found = set()
    for mover, targets in moves.items():
        for target in targets:
            if target == mover:
                continue
            solid, dashed = successors(pattern, mover, target)
            found.add(Transition("solid", key, topology.canonical_form(solid)))
            found.add(Transition("dashed", key, topology.canonical_form(dashed) if dashed else key))
    return tuple(sorted(found, key=lambda t: (t.kind, str(t.target))))


def _plans(topology: Topology, pattern: FrozenSet[Vertex],
           admissible: Callable[[FrozenSet[Vertex]], bool]) -> List[Plan]:
    stabilizer = topology.stabilizer(pattern)
    plans = []
    for movers in orbits(pattern, stabilizer):
        u = movers[0]
        fixing_u = [g for g in stabilizer if g.apply(u) == u]
        for targets in orbits(topology.neighbors(u), fixing_u):
            w0 = targets[0]
            if w0 in pattern and w0 in movers:
                continue
            solid, dashed = successors(pattern, u, w0)
            if not admissible(solid) or (dashed is not None and not admissible(dashed)):
                continue
            moves: Dict[Vertex, set] = {}
            for g in stabilizer:
                moves.setdefault(g.apply(u), set()).update(g.apply(w) for w in targets)
            plans.append(Plan(
                movers=movers,
                targets=targets,
                solid=topology.canonical_form(solid),
                dashed=topology.canonical_form(dashed) if dashed is not None else None,
                moves=tuple(sorted((v, frozenset(ws)) for v, ws in moves.items())),
            ))
    return plans


def _plan_depth(plan: Plan, key: Hashable, depth: Mapping[Hashable, float]) -> float:
    if plan.solid == key:
        return INFINITY
    needed = [plan.solid] + ([plan.dashed] if plan.dashed is not None else [])
    return 1 + max(depth.get(k, INFINITY) for k in needed)


def _assign_labels(entries: Dict[Hashable, ClassEntry]) -> None:
    reserved: Dict[int, set] = {}
    for entry in entries.values():
        if entry.label:
            occ, _, index = entry.label.partition(".")
            reserved.setdefault(int(occ), set()).add(index)
    counters: Dict[int, int] = {}
    for key in sorted(entries):
        entry = entries[key]
        if entry.label:
            continue
        index = counters.get(entry.occ, 0)
        while True:
            index += 1
            if str(index) not in reserved.get(entry.occ, set()):
                break
        counters[entry.occ] = index
        entry.label = f"{entry.occ}.{index}"


@log_function_call(logger, slow_after=5.0)
def synthesize_table(
    name: str,
    topology: Topology,
    universe: Iterable[FrozenSet[Vertex]],
    fixed: Iterable[FixedEntry],
    admissible: Callable[[FrozenSet[Vertex]], bool],
) -> MoveTable:
    """
    Build a minimum-depth move table.

    Args:
        name: Table name used in exports
        topology: Topology providing canonical forms and stabilizers
        universe: Patterns to cover (any representatives, deduplicated by class)
        fixed: Hand-specified classes, including terminals and excluded classes
        admissible: Predicate every successor pattern of a synthesized move must satisfy

    Returns:
        MoveTable with labels, depths, moves and transitions

    Raises:
        SynthesisError: If some class has no plan of finite depth
    """
    entries: Dict[Hashable, ClassEntry] = {}
    for pattern in universe:
        key, _, image = topology.canonical_pattern(frozenset(pattern))
        entries.setdefault(key, ClassEntry(key=key, pattern=image))

    for given in fixed:
        key, element, image = topology.canonical_pattern(frozenset(given.representative))
        moves = {
            element.apply(v): frozenset(element.apply(w) for w in targets)
            for v, targets in given.moves.items()
        }
        entries[key] = ClassEntry(
            key=key, pattern=image, label=given.label, moves=moves, depth=given.depth,
            fixed=True, terminal=given.terminal, excluded=given.excluded,
        )

    open_keys = sorted(k for k, e in entries.items() if not e.fixed)
    plans = {key: _plans(topology, entries[key].pattern, admissible) for key in open_keys}
    depth: Dict[Hashable, float] = {
        k: e.depth for k, e in entries.items() if e.fixed and not e.excluded and e.depth is not None
    }

    changed = True
    while changed:
        changed = False
        for key in open_keys:
            best = min((_plan_depth(p, key, depth) for p in plans[key]), default=INFINITY)
            if best < depth.get(key, INFINITY):
                depth[key] = best
                changed = True

    unsolved = [k for k in open_keys if depth.get(k, INFINITY) == INFINITY]
    if unsolved:
        patterns = [sorted(entries[k].pattern) for k in unsolved]
        raise SynthesisError(f"{name}: {len(unsolved)} classes have no admissible plan", classes=patterns)

    for key in open_keys:
        chosen = next(p for p in plans[key] if _plan_depth(p, key, depth) == depth[key])
        entries[key].moves = dict(chosen.moves)
        entries[key].depth = int(depth[key])

    _assign_labels(entries)
    for key, entry in entries.items():
        entry.transitions = _entry_transitions(topology, key, entry.pattern, entry.moves)

    table = MoveTable(name, topology, entries)
    logger.info(f"Synthesized {name}: {len(table)} classes, max depth {table.max_depth}")
    return table
