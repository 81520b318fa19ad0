"""
Gathering on hypercubes.

Configurations whose minimum bounding hypercube has dimension b > 3 are
shrunk by splitting the bound into two halves S and D and moving robots
across; b <= 3 is finished with a certified Q3 move table.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from errors import InputError
from move_tables import FixedEntry, MoveTable, synthesize_table
from swarm import Configuration, GatheringAlgorithm, MoveOffer, Snapshot
from topology import (AxisSplit, BitVertex, Hypercube, SubHypercube, axis_splits, flip_bit,
                      mbh, vertices_of_mask)


ENDGAME_DIMENSION = 3


class HTask(Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"
    T5I = "T5i"
    T5II = "T5ii"
    T5III = "T5iii"
    T6 = "T6"
    T7 = "T7"
    T8 = "T8"


class DmaKind(Enum):
    ALLOWED = "allowed"
    FAIL_A = "fail-a"
    FAIL_B = "fail-b"
    FAIL_C = "fail-c"


class UHWitness(Enum):
    P2 = "P2"
    P3 = "P3"
    FULL = "full"
    NONE = "none"


@dataclass(frozen=True)
class DmaVerdict:
    """Outcome of the direct-move check for one split, with the witnessing vertices."""
    kind: DmaKind
    v: Optional[BitVertex] = None
    v_prime: Optional[BitVertex] = None
    w: Optional[BitVertex] = None

    @property
    def allowed(self) -> bool:
        return self.kind is DmaKind.ALLOWED


@dataclass(frozen=True)
class SplitStats:
    split: AxisSplit
    occ_source: int
    occ_target: int
    dma: DmaVerdict


@dataclass(frozen=True)
class LSets:
    """Nested split lists L0 ⊇ L1 ⊇ L2 ⊇ L3, in axis_splits order."""
    bound: SubHypercube
    l0: Tuple[SplitStats, ...]
    l1: Tuple[SplitStats, ...]
    l2: Tuple[SplitStats, ...]
    l3: Tuple[SplitStats, ...]


def _require_hypercube(configuration: Configuration) -> Hypercube:
    if not isinstance(configuration.topology, Hypercube):
        raise InputError(f"Expected a hypercube configuration, got '{configuration.topology.kind}'")
    return configuration.topology


def _occupied_in(region: SubHypercube, occupied: FrozenSet[BitVertex]) -> List[BitVertex]:
    return sorted(v for v in occupied if region.contains(v))


def _unoccupied_in(region: SubHypercube, occupied: FrozenSet[BitVertex]) -> List[BitVertex]:
    return [v for v in region.vertices() if v not in occupied]


def bound_dimension(configuration: Configuration) -> int:
    """Dimension b of the minimum bounding hypercube."""
    cube = _require_hypercube(configuration)
    return mbh(cube.dimension, configuration.occupied).dimension


def dma(split: AxisSplit, configuration: Configuration) -> DmaVerdict:
    """
    Direct-move check for an ordered split (S, D) of the bounding hypercube.

    Fails by (a) when S holds one occupied vertex and D is full, by (b) when S
    holds one occupied vertex v and the only unoccupied vertex of D is adjacent
    to v, and by (c) when S holds exactly two adjacent occupied vertices and the
    only unoccupied vertex of D is adjacent to one of them.
    """
    cube = _require_hypercube(configuration)
    occupied = configuration.occupied
    bound = mbh(cube.dimension, occupied)
    if split not in axis_splits(cube.dimension, bound):
        raise InputError("Split is not an ordered split of the minimum bounding hypercube")

    in_source = _occupied_in(split.source, occupied)
    holes = _unoccupied_in(split.target, occupied)
    axis = split.axis

    if len(in_source) == 1:
        v = in_source[0]
        if not holes:
            return DmaVerdict(DmaKind.FAIL_A, v=v, v_prime=flip_bit(v, axis))
        if len(holes) == 1 and holes[0] == flip_bit(v, axis):
            return DmaVerdict(DmaKind.FAIL_B, v=v, w=holes[0])
    elif len(in_source) == 2 and len(holes) == 1:
        a, b = in_source
        if cube.distance(a, b) == 1:
            w = holes[0]
            for v, other in ((a, b), (b, a)):
                if flip_bit(v, axis) == w:
                    return DmaVerdict(DmaKind.FAIL_C, v=v, v_prime=other, w=w)
    return DmaVerdict(DmaKind.ALLOWED)


def _reaches_hole(split: AxisSplit, occupied: FrozenSet[BitVertex]) -> bool:
    return any(flip_bit(v, split.axis) not in occupied for v in _occupied_in(split.source, occupied))


def l_sets(configuration: Configuration) -> LSets:
    """Compute L0..L3 for a configuration whose bounding hypercube has dimension b > 3."""
    cube = _require_hypercube(configuration)
    occupied = configuration.occupied
    bound = mbh(cube.dimension, occupied)
    if bound.dimension <= ENDGAME_DIMENSION:
        raise InputError(f"Split lists are defined for b > 3 only (b = {bound.dimension})")

    stats = []
    for split in axis_splits(cube.dimension, bound):
        occ_target = sum(1 for v in occupied if split.target.contains(v))
        stats.append(SplitStats(split, len(occupied) - occ_target, occ_target, dma(split, configuration)))

    best = max(s.occ_target for s in stats)
    l0 = tuple(s for s in stats if s.occ_target == best)
    l1 = tuple(s for s in l0 if s.occ_source < s.occ_target)
    l2 = tuple(s for s in l1 if s.dma.allowed)
    l3 = tuple(s for s in l2 if _reaches_hole(s.split, occupied))
    return LSets(bound, l0, l1, l2, l3)


def _witness_of(cube: Hypercube, occupied: FrozenSet[BitVertex]) -> UHWitness:
    if len(occupied) == cube.vertex_count:
        return UHWitness.FULL
    vertices = sorted(occupied)
    if len(vertices) == 2 and cube.distance(*vertices) == 1:
        return UHWitness.P2
    if len(vertices) == 3:
        for center in vertices:
            ends = [v for v in vertices if v != center]
            if all(cube.distance(center, e) == 1 for e in ends) and cube.distance(*ends) != 1:
                return UHWitness.P3
    return UHWitness.NONE


def uh_witness(configuration: Configuration) -> UHWitness:
    """Which ungatherable hypercube family the configuration belongs to."""
    return _witness_of(_require_hypercube(configuration), configuration.occupied)


@lru_cache(maxsize=1 << 15)
def _analysis(configuration: Configuration) -> Tuple[Optional[HTask], Optional[LSets]]:
    cube = _require_hypercube(configuration)
    occupied = configuration.occupied
    if configuration.occ == 1:
        return None, None
    bound = mbh(cube.dimension, occupied)
    b = bound.dimension
    if b <= ENDGAME_DIMENSION:
        full_bound = b == ENDGAME_DIMENSION and len(occupied) == bound.vertex_count
        if full_bound and cube.dimension > ENDGAME_DIMENSION:
            return HTask.T8, None
        return HTask.T1, None

    sets = l_sets(configuration)
    if sets.l1:
        if sets.l2:
            if len(sets.l2) == 1:
                return HTask.T2, sets
            return (HTask.T3 if sets.l3 else HTask.T4), sets
        kinds = {s.dma.kind for s in sets.l1}
        if DmaKind.FAIL_A in kinds:
            return HTask.T5I, sets
        if DmaKind.FAIL_B in kinds:
            return HTask.T5II, sets
        return HTask.T5III, sets

    if len(occupied) < bound.vertex_count:
        if any(_reaches_hole(s.split, occupied) for s in sets.l0):
            return HTask.T6, sets
        return HTask.T7, sets
    return HTask.T8, sets


def classify_h(configuration: Configuration) -> Optional[HTask]:
    """
    Task responsible for a configuration, None once gathered.

    Raises:
        InputError: If nothing is occupied or the topology is not a hypercube
    """
    if not configuration.occupied:
        raise InputError("Cannot classify an empty configuration")
    task, _ = _analysis(configuration)
    return task


def _source_neighbors(split: AxisSplit, v: BitVertex) -> Set[BitVertex]:
    return {flip_bit(v, a) for a in split.source.free_axes}


def _endgame_offer(table: MoveTable, cube: Hypercube, occupied: FrozenSet[BitVertex],
                   position: BitVertex) -> Set[BitVertex]:
    bound = mbh(cube.dimension, occupied)
    free = bound.free_axes
    padding = (0,) * (ENDGAME_DIMENSION - len(free))

    def embed(v: BitVertex) -> BitVertex:
        return tuple(v[a] for a in free) + padding

    here = embed(position)
    targets = table.lookup({embed(v) for v in occupied}, here)
    destinations: Set[BitVertex] = set()
    for target in targets or ():
        slot = next(i for i in range(ENDGAME_DIMENSION) if target[i] != here[i])
        if slot < len(free):
            destinations.add(flip_bit(position, free[slot]))
        else:
            destinations.update(flip_bit(position, a) for a in bound.frozen_axes)
    return destinations


def move_h(snapshot: Snapshot, table: Optional[MoveTable] = None) -> MoveOffer:
    """
    Offer of the active robot under the hypercube algorithm.

    Robots that are not designated movers of the current task get nil.
    """
    configuration = snapshot.configuration
    cube = _require_hypercube(configuration)
    occupied = configuration.occupied
    x = snapshot.position
    task, sets = _analysis(configuration)
    if task is None:
        return MoveOffer.nil(x)

    destinations: Set[BitVertex] = set()
    if task is HTask.T1:
        destinations = _endgame_offer(table or synthesize_t1_table(), cube, occupied, x)
    elif task is HTask.T2:
        split = sets.l2[0].split
        if split.source.contains(x):
            destinations.add(flip_bit(x, split.axis))
    elif task is HTask.T3:
        for s in sets.l3:
            target = flip_bit(x, s.split.axis)
            if s.split.source.contains(x) and target not in occupied:
                destinations.add(target)
    elif task is HTask.T4:
        for s in sets.l2:
            split = s.split
            if split.source.contains(x) and _source_neighbors(split, x) - occupied:
                destinations.add(flip_bit(x, split.axis))
    elif task in (HTask.T5I, HTask.T5II, HTask.T5III):
        kind = {HTask.T5I: DmaKind.FAIL_A, HTask.T5II: DmaKind.FAIL_B, HTask.T5III: DmaKind.FAIL_C}[task]
        for s in sets.l1:
            verdict = s.dma
            if verdict.kind is not kind:
                continue
            if task is HTask.T5I and x == verdict.v_prime:
                destinations.add(verdict.v)
            elif task is HTask.T5II and x == verdict.v:
                destinations.update(_source_neighbors(s.split, x))
            elif task is HTask.T5III and x == verdict.v:
                destinations.add(verdict.v_prime)
    elif task is HTask.T6:
        for s in sets.l0:
            target = flip_bit(x, s.split.axis)
            if s.split.source.contains(x) and target not in occupied:
                destinations.add(target)
    elif task is HTask.T7:
        for s in sets.l0:
            if s.split.source.contains(x):
                destinations.update(_source_neighbors(s.split, x) - occupied)
    elif task is HTask.T8:
        bound = mbh(cube.dimension, occupied)
        destinations.update(flip_bit(x, a) for a in bound.frozen_axes)

    return MoveOffer.to(destinations, x, task.value)


def _q3_fixed_entries() -> List[FixedEntry]:
    o, a, b, ab = (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)
    return [
        FixedEntry(frozenset({o}), "1.1", 0, terminal=True),
        FixedEntry(frozenset({o, a}), "2.1", 1, {o: {a}, a: {o}}),
        FixedEntry(frozenset({o, ab}), "2.2", 3, {o: {a, b}, ab: {a, b}}),
        FixedEntry(frozenset({o, a, ab}), "3.3", 2, {o: {a}, ab: {a}}),
        FixedEntry(frozenset(Hypercube(3).vertices()), "8.1", None, excluded=True),
    ]


@lru_cache(maxsize=1)
def synthesize_t1_table() -> MoveTable:
    """Certified Q3 endgame table covering every nonempty occupancy class."""
    cube = Hypercube(ENDGAME_DIMENSION)
    universe = [vertices_of_mask(mask, ENDGAME_DIMENSION) for mask in range(1, 1 << cube.vertex_count)]
    return synthesize_table(
        "q3-endgame",
        cube,
        universe,
        _q3_fixed_entries(),
        admissible=lambda pattern: _witness_of(cube, pattern) is UHWitness.NONE,
    )


# Task transitions admitted besides self pairs and dimension drops
EXPECTED_TRANSITIONS: Dict[str, FrozenSet[str]] = {
    "T1": frozenset({"T1", "GATHERED"}),
    "T2": frozenset({"T2", "T5i", "T5ii", "T5iii"}),
    "T3": frozenset({"T2", "T3", "T4", "T5i", "T5ii", "T5iii"}),
    "T4": frozenset({"T2", "T4", "T5i", "T5ii", "T5iii"}),
    "T5i": frozenset({"T5i", "T5ii"}),
    "T5ii": frozenset({"T2", "T5iii"}),
    "T5iii": frozenset({"T2", "T5iii"}),
    "T6": frozenset({"T2", "T3", "T4", "T5i", "T5ii", "T5iii"}),
    "T7": frozenset({"T2", "T3", "T4", "T5i", "T5ii", "T5iii", "T6"}),
    "T8": frozenset({"T5i", "T5ii"}),
}

ALLOWED_TASK_CYCLES: Tuple[Tuple[str, ...], ...] = (
    ("T2", "T5i", "T5ii"),
    ("T2", "T5ii"),
    ("T2", "T5ii", "T5iii"),
    ("T2", "T5iii"),
)


class HypercubeGathering(GatheringAlgorithm):
    """Gathering algorithm for Q_d with d >= 3."""

    name = "hypercube"

    def __init__(self, table: Optional[MoveTable] = None):
        self.table = table or synthesize_t1_table()

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        return move_h(snapshot, self.table)

    def classify(self, configuration: Configuration) -> Optional[str]:
        task = classify_h(configuration)
        return task.value if task else None

    def ungatherable_witness(self, configuration: Configuration) -> Optional[str]:
        witness = uh_witness(configuration)
        return None if witness is UHWitness.NONE else witness.value

    def measure(self, configuration: Configuration) -> int:
        return bound_dimension(configuration)
