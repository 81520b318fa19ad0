"""
Gathering on the infinite square grid.

The minimum bounding rectangle is first given an unoccupied corner, then
shrunk side by side until a 3x2 pattern is reached, which a certified table
drives to the 2x2 diagonal nice star.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from errors import InputError
from move_tables import FixedEntry, MoveTable, synthesize_table
from swarm import Configuration, GatheringAlgorithm, MoveOffer, Snapshot
from topology import GridVertex, Rectangle, SquareGrid, mbr


class GTask(Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"


class USTWitness(Enum):
    ONE_BY_TWO = "1x2"
    TWO_BY_TWO_THREE = "2x2-three"
    NONE = "none"


@dataclass(frozen=True)
class MbrShape:
    """Bounding rectangle of a configuration and the occupancy of its corners."""
    rectangle: Rectangle
    occupied_corners: FrozenSet[GridVertex]
    empty_corners: FrozenSet[GridVertex]

    @classmethod
    def of(cls, occupied: FrozenSet[GridVertex]) -> "MbrShape":
        rectangle = mbr(occupied)
        corners = rectangle.corners()
        return cls(rectangle, corners & occupied, corners - occupied)

    @property
    def short(self) -> int:
        return self.rectangle.shape[0]

    @property
    def long(self) -> int:
        return self.rectangle.shape[1]

    @property
    def all_corners_occupied(self) -> bool:
        return not self.empty_corners


def _require_grid(configuration: Configuration) -> SquareGrid:
    if not isinstance(configuration.topology, SquareGrid):
        raise InputError(f"Expected a grid configuration, got '{configuration.topology.kind}'")
    return configuration.topology


def ust_witness(configuration: Configuration) -> USTWitness:
    """Which ungatherable grid configuration this is, if any."""
    _require_grid(configuration)
    shape = MbrShape.of(configuration.occupied).rectangle.shape
    if shape == (1, 2):
        return USTWitness.ONE_BY_TWO
    if shape == (2, 2) and configuration.occ == 3:
        return USTWitness.TWO_BY_TWO_THREE
    return USTWitness.NONE


def classify_st(configuration: Configuration) -> Optional[GTask]:
    """
    Task responsible for a grid configuration, None once gathered.

    Shapes are compared orientation-free as (short side, long side).
    """
    _require_grid(configuration)
    if configuration.occ == 1:
        return None
    shape = MbrShape.of(configuration.occupied)
    short, long = shape.short, shape.long
    if short == 1:
        return GTask.T4 if long == 2 else GTask.T1
    if (short, long) == (2, 2):
        return GTask.T1 if configuration.occ == 4 else GTask.T4
    if shape.all_corners_occupied:
        return GTask.T1
    if (short, long) == (2, 3):
        return GTask.T3
    return GTask.T2


def _step(v: GridVertex, direction: Tuple[int, int], sign: int = 1) -> GridVertex:
    return (v[0] + sign * direction[0], v[1] + sign * direction[1])


def _special_moves(shape: MbrShape, x: GridVertex) -> Set[GridVertex]:
    rectangle = shape.rectangle
    if shape.short == 1:
        if rectangle.rows == 1:
            return {(x[0] - 1, x[1]), (x[0] + 1, x[1])}
        return {(x[0], x[1] - 1), (x[0], x[1] + 1)}
    return {_step(x, side.inward, -1) for side in rectangle.sides() if x in side}


def _general_moves(shape: MbrShape, x: GridVertex) -> Set[GridVertex]:
    rectangle = shape.rectangle
    sides = rectangle.sides()
    if rectangle.rows != rectangle.columns:
        sides = [s for s in sides if s.length == shape.short]
    designated = [s for s in sides if any(corner not in s for corner in shape.empty_corners)]
    return {_step(x, side.inward) for side in designated if x in side}


def _final_moves(shape: MbrShape, occupied: FrozenSet[GridVertex], x: GridVertex) -> Set[GridVertex]:
    if shape.short == 1:
        return set(occupied - {x})
    if len(occupied) == 2:
        return set(shape.empty_corners)
    (missing,) = shape.empty_corners
    r0, c0 = shape.rectangle.min_corner
    r1, c1 = shape.rectangle.max_corner
    center = (r0 + r1 - missing[0], c0 + c1 - missing[1])
    return set() if x == center else {center}


def move_st(snapshot: Snapshot, table: Optional[MoveTable] = None) -> MoveOffer:
    """Offer of the active robot under the grid algorithm."""
    configuration = snapshot.configuration
    x = snapshot.position
    task = classify_st(configuration)
    if task is None:
        return MoveOffer.nil(x)
    occupied = configuration.occupied
    shape = MbrShape.of(occupied)

    if task is GTask.T1:
        destinations = _special_moves(shape, x)
    elif task is GTask.T2:
        destinations = _general_moves(shape, x)
    elif task is GTask.T3:
        destinations = set((table or synthesize_32_table()).lookup(occupied, x) or ())
    else:
        destinations = _final_moves(shape, occupied, x)
    return MoveOffer.to(destinations, x, task.value)


def _window_patterns() -> List[FrozenSet[GridVertex]]:
    window = Rectangle((0, 0), (2, 1))
    cells = window.vertices()
    patterns = []
    for size in range(2, len(cells) + 1):
        for chosen in combinations(cells, size):
            pattern = frozenset(chosen)
            shape = MbrShape.of(pattern)
            if shape.rectangle == window and shape.empty_corners:
                patterns.append(pattern)
    return patterns


@lru_cache(maxsize=1)
def synthesize_32_table() -> MoveTable:
    """Certified table driving every 3x2 pattern with an empty corner to the 2x2 diagonal."""
    grid = SquareGrid()
    universe = _window_patterns()
    diagonal = frozenset({(0, 0), (1, 1)})
    pre_final = {grid.canonical_form(p) for p in universe}
    terminal = grid.canonical_form(diagonal)

    def admissible(pattern: FrozenSet[GridVertex]) -> bool:
        key = grid.canonical_form(pattern)
        return key in pre_final or key == terminal

    return synthesize_table(
        "grid-3x2",
        grid,
        universe,
        [FixedEntry(diagonal, "2.1", 0, terminal=True)],
        admissible=admissible,
    )


EXPECTED_TRANSITIONS: Dict[str, FrozenSet[str]] = {
    "T1": frozenset({"T1", "T2", "T3"}),
    "T2": frozenset({"T2", "T3"}),
    "T3": frozenset({"T3", "T4"}),
    "T4": frozenset({"T4", "GATHERED"}),
}


class GridGathering(GatheringAlgorithm):
    """Gathering algorithm for the square tessellation graph."""

    name = "grid"

    def __init__(self, table: Optional[MoveTable] = None):
        self.table = table or synthesize_32_table()

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        return move_st(snapshot, self.table)

    def classify(self, configuration: Configuration) -> Optional[str]:
        task = classify_st(configuration)
        return task.value if task else None

    def ungatherable_witness(self, configuration: Configuration) -> Optional[str]:
        witness = ust_witness(configuration)
        return None if witness is USTWitness.NONE else witness.value

    def measure(self, configuration: Configuration) -> int:
        rectangle = mbr(configuration.occupied)
        return rectangle.rows + rectangle.columns
