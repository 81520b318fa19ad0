"""
Geometry of the supported topologies.

Provides d-dimensional hypercubes and the infinite square tessellation graph,
bounding regions (minimum bounding hypercube and rectangle), axis splits and
the automorphism machinery used for canonical forms and equivariance checks.
"""

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Hashable, Iterable, List, Optional, Tuple

from errors import CapabilityError, InputError


Vertex = Hashable
BitVertex = Tuple[int, ...]
GridVertex = Tuple[int, int]

# Exhaustive group minimization stays below 3840 elements per call
MAX_CANONICAL_DIMENSION = 5
MAX_GRID_PATTERN_SIDE = 64


class Topology(ABC):
    """Common interface of the graphs robots move on."""

    kind: str = "abstract"

    @abstractmethod
    def validate_vertex(self, v: Vertex) -> None:
        """Raise InputError if v is not a vertex of this topology."""

    @abstractmethod
    def neighbors(self, v: Vertex) -> FrozenSet[Vertex]:
        """Return the vertices adjacent to v."""

    @abstractmethod
    def distance(self, u: Vertex, v: Vertex) -> int:
        """Return the graph distance between u and v."""

    @abstractmethod
    def render_vertex(self, v: Vertex) -> str:
        """Render a vertex for trace files and CLI output."""

    @abstractmethod
    def parse_vertex(self, text: str) -> Vertex:
        """Parse the rendering produced by render_vertex."""

    @property
    def is_finite(self) -> bool:
        return False

    def canonical_pattern(self, occupied: FrozenSet[Vertex]):
        """
        Return (key, automorphism, image) with image = automorphism(occupied).

        The key is identical for two occupancy sets iff an automorphism maps
        one onto the other.
        """
        raise CapabilityError(f"No canonical forms for topology '{self.kind}'")

    def canonical_form(self, occupied: Iterable[Vertex]) -> Hashable:
        key, _, _ = self.canonical_pattern(frozenset(occupied))
        return key

    def stabilizer(self, occupied: FrozenSet[Vertex]) -> list:
        """Automorphisms mapping the occupancy set onto itself."""
        raise CapabilityError(f"No automorphism group for topology '{self.kind}'")

    def vertex_stabilizer(self, v: Vertex) -> list:
        """Automorphisms fixing a single vertex."""
        raise CapabilityError(f"No automorphism group for topology '{self.kind}'")

    def diameter_of(self, occupied: Iterable[Vertex]) -> int:
        """Maximum pairwise distance among the given vertices (0 for fewer than two)."""
        vertices = list(occupied)
        best = 0
        for i, u in enumerate(vertices):
            for v in vertices[i + 1:]:
                best = max(best, self.distance(u, v))
        return best


# ---------------------------------------------------------------------------
# Hypercubes
# ---------------------------------------------------------------------------

def flip_bit(v: BitVertex, axis: int) -> BitVertex:
    """Return v with coordinate `axis` complemented."""
    return v[:axis] + (1 - v[axis],) + v[axis + 1:]


def vertex_index(v: BitVertex) -> int:
    """Integer encoding of a bit-tuple, first coordinate most significant."""
    index = 0
    for bit in v:
        index = (index << 1) | bit
    return index


def vertex_from_index(index: int, d: int) -> BitVertex:
    return tuple((index >> (d - 1 - i)) & 1 for i in range(d))


def occupancy_mask(vertices: Iterable[BitVertex]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << vertex_index(v)
    return mask


def vertices_of_mask(mask: int, d: int) -> FrozenSet[BitVertex]:
    return frozenset(vertex_from_index(i, d) for i in range(1 << d) if mask >> i & 1)


@dataclass(frozen=True)
class HypercubeAutomorphism:
    """
    Element of the hyperoctahedral group.

    The image of v has coordinate i equal to v[perm[i]] xor flip[i].
    """
    perm: Tuple[int, ...]
    flip: Tuple[int, ...]

    @classmethod
    def identity(cls, d: int) -> "HypercubeAutomorphism":
        return cls(tuple(range(d)), (0,) * d)

    def apply(self, v: BitVertex) -> BitVertex:
        return tuple(v[p] ^ f for p, f in zip(self.perm, self.flip))

    def apply_set(self, vertices: Iterable[BitVertex]) -> FrozenSet[BitVertex]:
        return frozenset(self.apply(v) for v in vertices)

    def compose(self, other: "HypercubeAutomorphism") -> "HypercubeAutomorphism":
        """Return self after other."""
        perm = tuple(other.perm[p] for p in self.perm)
        flip = tuple(other.flip[p] ^ f for p, f in zip(self.perm, self.flip))
        return HypercubeAutomorphism(perm, flip)

    def inverse(self) -> "HypercubeAutomorphism":
        d = len(self.perm)
        position = [0] * d
        for i, p in enumerate(self.perm):
            position[p] = i
        return HypercubeAutomorphism(
            tuple(position),
            tuple(self.flip[position[j]] for j in range(d)),
        )


@lru_cache(maxsize=None)
def hypercube_group(d: int) -> Tuple[HypercubeAutomorphism, ...]:
    """All d!·2^d automorphisms of Q_d in a fixed order."""
    if d > MAX_CANONICAL_DIMENSION:
        raise CapabilityError(
            f"Hypercube dimension {d} exceeds the exhaustive group limit {MAX_CANONICAL_DIMENSION}",
            estimate=math.factorial(d) * 2 ** d,
        )
    return tuple(
        HypercubeAutomorphism(perm, flip)
        for perm in itertools.permutations(range(d))
        for flip in itertools.product((0, 1), repeat=d)
    )


@lru_cache(maxsize=1 << 16)
def canonicalize_hypercube(d: int, occupied: FrozenSet[BitVertex]):
    """Minimize the occupancy bitmask over the hyperoctahedral group."""
    if not occupied:
        raise InputError("Cannot canonicalize an empty occupancy set")
    best_mask = None
    best_element = None
    for element in hypercube_group(d):
        mask = occupancy_mask(element.apply_set(occupied))
        if best_mask is None or mask < best_mask:
            best_mask, best_element = mask, element
    return best_mask, best_element, vertices_of_mask(best_mask, d)


@dataclass(frozen=True)
class Hypercube(Topology):
    """The hypercube Q_d with vertex set {0,1}^d."""
    dimension: int
    kind = "hypercube"

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise InputError(f"Hypercube dimension must be a positive integer, got {self.dimension!r}")

    @property
    def is_finite(self) -> bool:
        return True

    @property
    def vertex_count(self) -> int:
        return 2 ** self.dimension

    @property
    def edge_count(self) -> int:
        return self.dimension * 2 ** (self.dimension - 1)

    @property
    def diameter(self) -> int:
        return self.dimension

    def validate_vertex(self, v: Vertex) -> None:
        if (
            not isinstance(v, tuple)
            or len(v) != self.dimension
            or any(bit not in (0, 1) or isinstance(bit, bool) for bit in v)
        ):
            raise InputError(f"Malformed vertex {v!r} for Q{self.dimension}")

    def vertices(self) -> List[BitVertex]:
        return [tuple(bits) for bits in itertools.product((0, 1), repeat=self.dimension)]

    def neighbors(self, v: Vertex) -> FrozenSet[BitVertex]:
        self.validate_vertex(v)
        return frozenset(flip_bit(v, axis) for axis in range(self.dimension))

    def distance(self, u: Vertex, v: Vertex) -> int:
        self.validate_vertex(u)
        self.validate_vertex(v)
        return sum(a != b for a, b in zip(u, v))

    def render_vertex(self, v: Vertex) -> str:
        return "".join(str(bit) for bit in v)

    def parse_vertex(self, text: str) -> BitVertex:
        text = text.strip()
        if len(text) != self.dimension or any(ch not in "01" for ch in text):
            raise InputError(f"Cannot parse '{text}' as a vertex of Q{self.dimension}")
        return tuple(int(ch) for ch in text)

    def automorphisms(self) -> Tuple[HypercubeAutomorphism, ...]:
        return hypercube_group(self.dimension)

    def canonical_pattern(self, occupied: FrozenSet[Vertex]):
        occupied = frozenset(occupied)
        for v in occupied:
            self.validate_vertex(v)
        return canonicalize_hypercube(self.dimension, occupied)

    def stabilizer(self, occupied: FrozenSet[Vertex]) -> List[HypercubeAutomorphism]:
        occupied = frozenset(occupied)
        return [g for g in hypercube_group(self.dimension) if g.apply_set(occupied) == occupied]

    def vertex_stabilizer(self, v: Vertex) -> List[HypercubeAutomorphism]:
        self.validate_vertex(v)
        return [g for g in hypercube_group(self.dimension) if g.apply(v) == v]


@dataclass(frozen=True)
class SubHypercube:
    """
    A sub-hypercube given by its frozen coordinates.

    fixed[i] is the frozen bit of coordinate i, or None when the coordinate
    is free. Equality is structural.
    """
    fixed: Tuple[Optional[int], ...]

    @property
    def ambient_dimension(self) -> int:
        return len(self.fixed)

    @property
    def free_axes(self) -> Tuple[int, ...]:
        return tuple(i for i, bit in enumerate(self.fixed) if bit is None)

    @property
    def frozen_axes(self) -> Tuple[int, ...]:
        return tuple(i for i, bit in enumerate(self.fixed) if bit is not None)

    @property
    def dimension(self) -> int:
        return len(self.free_axes)

    @property
    def vertex_count(self) -> int:
        return 2 ** self.dimension

    def contains(self, v: BitVertex) -> bool:
        return all(bit is None or v[i] == bit for i, bit in enumerate(self.fixed))

    def with_axis(self, axis: int, value: int) -> "SubHypercube":
        if self.fixed[axis] is not None:
            raise InputError(f"Axis {axis} is already frozen")
        return SubHypercube(self.fixed[:axis] + (value,) + self.fixed[axis + 1:])

    def vertices(self) -> List[BitVertex]:
        free = self.free_axes
        result = []
        for bits in itertools.product((0, 1), repeat=len(free)):
            v = list(self.fixed)
            for axis, bit in zip(free, bits):
                v[axis] = bit
            result.append(tuple(v))
        return result


@dataclass(frozen=True)
class AxisSplit:
    """Ordered split (S, D) of a bounding sub-hypercube along one free axis."""
    axis: int
    source: SubHypercube
    target: SubHypercube


def mbh(d: int, occupied: Iterable[BitVertex]) -> SubHypercube:
    """
    Minimum bounding sub-hypercube of an occupancy set.

    Args:
        d: Ambient hypercube dimension
        occupied: Occupied vertices

    Returns:
        SubHypercube freezing exactly the coordinates on which all vertices agree
    """
    vertices = list(occupied)
    if not vertices:
        raise InputError("Minimum bounding hypercube of an empty set is undefined")
    cube = Hypercube(d)
    for v in vertices:
        cube.validate_vertex(v)
    first = vertices[0]
    return SubHypercube(tuple(
        first[i] if all(v[i] == first[i] for v in vertices) else None
        for i in range(d)
    ))


def axis_splits(d: int, bound: SubHypercube) -> List[AxisSplit]:
    """
    All 2·b ordered splits of a bounding sub-hypercube.

    Axes are visited in ascending order, side 0 as S before side 1 as S.
    """
    if bound.ambient_dimension != d:
        raise InputError(f"Sub-hypercube lives in Q{bound.ambient_dimension}, not Q{d}")
    if bound.dimension == 0:
        raise InputError("Cannot split a zero-dimensional sub-hypercube")
    splits = []
    for axis in bound.free_axes:
        for side in (0, 1):
            splits.append(AxisSplit(axis, bound.with_axis(axis, side), bound.with_axis(axis, 1 - side)))
    return splits


# ---------------------------------------------------------------------------
# Square grid
# Signed permutation matrices (a, b, c, e) acting as (x, y) -> (a·x + b·y, c·x + e·y)

# Signed permutation matrices (a, b, c, e) acting as (r, c) -> (a·r + b·c, c·r + e·c)
DIHEDRAL_MATRICES: Tuple[Tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (0, -1, 1, 0),
    (-1, 0, 0, -1),
    (0, 1, -1, 0),
    (1, 0, 0, -1),
    (-1, 0, 0, 1),
    (0, 1, 1, 0),
    (0, -1, -1, 0),
)


@dataclass(frozen=True)
class GridAutomorphism:
    """Dihedral symmetry of the square followed by an integer translation."""
    matrix: Tuple[int, int, int, int]
    translation: Tuple[int, int] = (0, 0)

    @classmethod
    def identity(cls) -> "GridAutomorphism":
        return cls((1, 0, 0, 1), (0, 0))

    def apply(self, v: GridVertex) -> GridVertex:
        a, b, c, e = self.matrix
        return (a * v[0] + b * v[1] + self.translation[0], c * v[0] + e * v[1] + self.translation[1])

    def apply_set(self, vertices: Iterable[GridVertex]) -> FrozenSet[GridVertex]:
        return frozenset(self.apply(v) for v in vertices)

    def compose(self, other: "GridAutomorphism") -> "GridAutomorphism":
        """Return self after other."""
        a, b, c, e = self.matrix
        p, q, r, s = other.matrix
        matrix = (a * p + b * r, a * q + b * s, c * p + e * r, c * q + e * s)
        shifted = GridAutomorphism(self.matrix).apply(other.translation)
        return GridAutomorphism(matrix, (shifted[0] + self.translation[0], shifted[1] + self.translation[1]))

    def inverse(self) -> "GridAutomorphism":
        a, b, c, e = self.matrix
        transposed = (a, c, b, e)
        back = GridAutomorphism(transposed).apply(self.translation)
        return GridAutomorphism(transposed, (-back[0], -back[1]))


@lru_cache(maxsize=1 << 16)
def canonicalize_grid(occupied: FrozenSet[GridVertex]):
    """Minimize the sorted, origin-anchored pattern over the dihedral group."""
    if not occupied:
        raise InputError("Cannot canonicalize an empty occupancy set")
    best_key = None
    best_element = None
    for matrix in DIHEDRAL_MATRICES:
        image = GridAutomorphism(matrix).apply_set(occupied)
        low_r = min(v[0] for v in image)
        low_c = min(v[1] for v in image)
        if max(v[0] for v in image) - low_r >= MAX_GRID_PATTERN_SIDE or \
                max(v[1] for v in image) - low_c >= MAX_GRID_PATTERN_SIDE:
            raise CapabilityError(
                f"Grid pattern exceeds the {MAX_GRID_PATTERN_SIDE}-cell canonicalization window"
            )
        key = tuple(sorted((r - low_r, c - low_c) for r, c in image))
        if best_key is None or key < best_key:
            best_key = key
            best_element = GridAutomorphism(matrix, (-low_r, -low_c))
    return best_key, best_element, frozenset(best_key)


@dataclass(frozen=True)
class RectangleSide:
    """One side of a rectangle with its inward unit step."""
    name: str
    vertices: FrozenSet[GridVertex]
    inward: Tuple[int, int]

    @property
    def length(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: GridVertex) -> bool:
        return v in self.vertices


@dataclass(frozen=True)
class Rectangle:
    """Axis-parallel rectangle of grid vertices; rows are the first coordinate."""
    min_corner: GridVertex
    max_corner: GridVertex

    def __post_init__(self):
        if self.min_corner[0] > self.max_corner[0] or self.min_corner[1] > self.max_corner[1]:
            raise InputError(f"Rectangle corners out of order: {self.min_corner} > {self.max_corner}")

    @property
    def rows(self) -> int:
        return self.max_corner[0] - self.min_corner[0] + 1

    @property
    def columns(self) -> int:
        return self.max_corner[1] - self.min_corner[1] + 1

    @property
    def shape(self) -> Tuple[int, int]:
        """Orientation-free (short side, long side)."""
        return (min(self.rows, self.columns), max(self.rows, self.columns))

    def contains(self, v: GridVertex) -> bool:
        return (self.min_corner[0] <= v[0] <= self.max_corner[0]
                and self.min_corner[1] <= v[1] <= self.max_corner[1])

    def corners(self) -> FrozenSet[GridVertex]:
        (r0, c0), (r1, c1) = self.min_corner, self.max_corner
        return frozenset({(r0, c0), (r0, c1), (r1, c0), (r1, c1)})

    def vertices(self) -> List[GridVertex]:
        return [
            (r, c)
            for r in range(self.min_corner[0], self.max_corner[0] + 1)
            for c in range(self.min_corner[1], self.max_corner[1] + 1)
        ]

    def sides(self) -> List[RectangleSide]:
        (r0, c0), (r1, c1) = self.min_corner, self.max_corner
        columns = range(c0, c1 + 1)
        rows = range(r0, r1 + 1)
        return [
            RectangleSide("top", frozenset((r0, c) for c in columns), (1, 0)),
            RectangleSide("bottom", frozenset((r1, c) for c in columns), (-1, 0)),
            RectangleSide("left", frozenset((r, c0) for r in rows), (0, 1)),
            RectangleSide("right", frozenset((r, c1) for r in rows), (0, -1)),
        ]


def mbr(occupied: Iterable[GridVertex]) -> Rectangle:
    """Minimum bounding rectangle of a finite, nonempty set of grid vertices."""
    vertices = list(occupied)
    if not vertices:
        raise InputError("Minimum bounding rectangle of an empty set is undefined")
    return Rectangle(
        (min(v[0] for v in vertices), min(v[1] for v in vertices)),
        (max(v[0] for v in vertices), max(v[1] for v in vertices)),
    )


@dataclass(frozen=True)
class SquareGrid(Topology):
    """The infinite square tessellation graph, never materialized."""
    coordinate_limit: int = 10 ** 6
    kind = "grid"

    def validate_vertex(self, v: Vertex) -> None:
        if (
            not isinstance(v, tuple)
            or len(v) != 2
            or any(not isinstance(x, int) or isinstance(x, bool) for x in v)
            or any(abs(x) > self.coordinate_limit for x in v)
        ):
            raise InputError(f"Malformed grid vertex {v!r}")

    def neighbors(self, v: Vertex) -> FrozenSet[GridVertex]:
        self.validate_vertex(v)
        r, c = v
        return frozenset({(r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)})

    def distance(self, u: Vertex, v: Vertex) -> int:
        self.validate_vertex(u)
        self.validate_vertex(v)
        return abs(u[0] - v[0]) + abs(u[1] - v[1])

    def render_vertex(self, v: Vertex) -> str:
        return f"({v[0]},{v[1]})"

    def parse_vertex(self, text: str) -> GridVertex:
        body = text.strip().strip("()")
        parts = body.split(",")
        try:
            vertex = tuple(int(part) for part in parts)
        except ValueError:
            raise InputError(f"Cannot parse '{text}' as a grid vertex")
        self.validate_vertex(vertex)
        return vertex

    def vertices_in(self, window: Rectangle) -> List[GridVertex]:
        return window.vertices()

    def automorphisms(self) -> Tuple[GridAutomorphism, ...]:
        return tuple(GridAutomorphism(matrix) for matrix in DIHEDRAL_MATRICES)

    def canonical_pattern(self, occupied: FrozenSet[Vertex]):
        occupied = frozenset(occupied)
        for v in occupied:
            self.validate_vertex(v)
        return canonicalize_grid(occupied)

    def stabilizer(self, occupied: FrozenSet[Vertex]) -> List[GridAutomorphism]:
        occupied = frozenset(occupied)
        low = (min(v[0] for v in occupied), min(v[1] for v in occupied))
        result = []
        for matrix in DIHEDRAL_MATRICES:
            image = GridAutomorphism(matrix).apply_set(occupied)
            shift = (low[0] - min(v[0] for v in image), low[1] - min(v[1] for v in image))
            element = GridAutomorphism(matrix, shift)
            if element.apply_set(occupied) == occupied:
                result.append(element)
        return result

    def vertex_stabilizer(self, v: Vertex) -> List[GridAutomorphism]:
        self.validate_vertex(v)
        result = []
        for matrix in DIHEDRAL_MATRICES:
            image = GridAutomorphism(matrix).apply(v)
            result.append(GridAutomorphism(matrix, (v[0] - image[0], v[1] - image[1])))
        return result


def canonical_form(topology: Topology, occupied: Iterable[Vertex]) -> Hashable:
    """Automorphism-invariant key of an occupancy set."""
    return topology.canonical_form(occupied)


def apply_automorphism(automorphism, occupied: Iterable[Vertex]) -> FrozenSet[Vertex]:
    """Image of an occupancy set under a hypercube or grid automorphism."""
    return automorphism.apply_set(occupied)
