"""
Constructive ungatherability witnesses.

Hidden placements and fixed activation orders that defeat gathering on
vertex- and edge-transitive graphs, strawman algorithms to run them against,
and a recurrence-based non-termination prover.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import networkx as nx

from errors import CapabilityError, InputError, ScenarioInapplicableError, UngatherableInitialError
from gather_grid import GridGathering
from gather_hypercube import HypercubeGathering
from swarm import (CanonicalResolver, Configuration, GatheringAlgorithm, MoveOffer, Placement,
                   RecurrenceCertificate, Resolver, RunResult, Schedule, ScriptedResolver, Snapshot,
                   SwarmEngine, Verdict, is_nice_star)
from topology import Hypercube, SquareGrid, Topology, Vertex
from utils.validators import CheckResult


MAX_CHASE_VERTICES = 32


class GraphTopology(Topology):
    """A finite demonstration graph backed by networkx; vertices are integers."""

    def __init__(self, graph: nx.Graph, kind: str, family: str = "graph", size: Optional[int] = None):
        self.graph = graph
        self.kind = kind
        self.family = family
        self.size = size
        self._distances = dict(nx.all_pairs_shortest_path_length(graph))

    @property
    def is_finite(self) -> bool:
        return True

    def vertices(self) -> List[int]:
        return sorted(self.graph.nodes)

    def validate_vertex(self, v: Vertex) -> None:
        if v not in self.graph:
            raise InputError(f"Vertex {v!r} is not in {self.kind} graph")

    def neighbors(self, v: Vertex) -> FrozenSet[int]:
        self.validate_vertex(v)
        return frozenset(self.graph.neighbors(v))

    def distance(self, u: Vertex, v: Vertex) -> int:
        self.validate_vertex(u)
        self.validate_vertex(v)
        return self._distances[u][v]

    def render_vertex(self, v: Vertex) -> str:
        return str(v)

    def parse_vertex(self, text: str) -> int:
        try:
            vertex = int(text.strip())
        except ValueError:
            raise InputError(f"Cannot parse '{text}' as a {self.kind} vertex")
        self.validate_vertex(vertex)
        return vertex

    def __repr__(self) -> str:
        return f"GraphTopology({self.kind}, n={self.graph.number_of_nodes()})"


def clique(n: int) -> GraphTopology:
    return GraphTopology(nx.complete_graph(n), f"K{n}", "clique", n)


def complete_bipartite(n: int) -> GraphTopology:
    """K_{n,n} with sides 0..n-1 and n..2n-1."""
    return GraphTopology(nx.complete_bipartite_graph(n, n), f"K{n},{n}", "bipartite", n)


TOPOLOGY_KINDS = ("hypercube", "grid", "clique", "bipartite")


def build_topology(kind: str, size: Optional[int] = None) -> Topology:
    """Topology from a selector; size is the dimension of Q_d or n of K_n / K_{n,n}."""
    if kind == "hypercube":
        return Hypercube(3 if size is None else size)
    if kind == "grid":
        return SquareGrid()
    if kind in ("clique", "bipartite"):
        if size is None or size < 2:
            raise InputError(f"A {kind} needs a size of at least 2")
        return clique(size) if kind == "clique" else complete_bipartite(size)
    raise InputError(f"Unknown topology '{kind}' (expected one of: {', '.join(TOPOLOGY_KINDS)})")


def topology_selector(topology: Topology) -> Tuple[str, Optional[int]]:
    if isinstance(topology, Hypercube):
        return "hypercube", topology.dimension
    if isinstance(topology, SquareGrid):
        return "grid", None
    if isinstance(topology, GraphTopology) and topology.family in ("clique", "bipartite"):
        return topology.family, topology.size
    raise InputError(f"Topology '{topology.kind}' has no selector")


# ---------------------------------------------------------------------------
# Strawman algorithms
# ---------------------------------------------------------------------------

class GreedyReducer(GatheringAlgorithm):
    """Moves to the neighbors minimizing the total distance to the other occupied vertices."""

    name = "greedy"

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        configuration = snapshot.configuration
        x = snapshot.position
        if configuration.is_gathered:
            return MoveOffer.nil(x)
        topology = snapshot.topology
        others = configuration.occupied - {x}

        def cost(v: Vertex) -> int:
            return sum(topology.distance(v, o) for o in others)

        here = cost(x)
        costs = {v: cost(v) for v in topology.neighbors(x)}
        best = min(costs.values())
        if best >= here:
            return MoveOffer.nil(x, self.name)
        return MoveOffer.to((v for v, c in costs.items() if c == best), x, self.name)


class TowardOccupied(GatheringAlgorithm):
    name = "toward-occupied"

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        x = snapshot.position
        if snapshot.configuration.is_gathered:
            return MoveOffer.nil(x)
        return MoveOffer.to(snapshot.topology.neighbors(x) & snapshot.configuration.occupied, x, self.name)


class TowardUnoccupied(GatheringAlgorithm):
    name = "toward-unoccupied"

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        x = snapshot.position
        if snapshot.configuration.is_gathered:
            return MoveOffer.nil(x)
        return MoveOffer.to(snapshot.topology.neighbors(x) - snapshot.configuration.occupied, x, self.name)


class MoveAcross(GatheringAlgorithm):
    """
    Gathers on K_{n,n} when all robots start on one side.

    With the other side empty every vertex there is offered; with exactly one
    occupied vertex on the other side, that vertex is offered; otherwise nil.
    """

    name = "move-across"

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        x = snapshot.position
        configuration = snapshot.configuration
        if configuration.is_gathered:
            return MoveOffer.nil(x)
        across = snapshot.topology.neighbors(x)
        occupied_across = across & configuration.occupied
        if not occupied_across:
            return MoveOffer.to(across, x, self.name)
        if len(occupied_across) == 1:
            return MoveOffer.to(occupied_across, x, self.name)
        return MoveOffer.nil(x, self.name)


class LowestLabel(GatheringAlgorithm):
    """Steps to the smallest-labelled neighbor; not automorphism-equivariant."""

    name = "lowest-label"

    def offer(self, snapshot: Snapshot) -> MoveOffer:
        x = snapshot.position
        if snapshot.configuration.is_gathered:
            return MoveOffer.nil(x)
        return MoveOffer.to({min(snapshot.topology.neighbors(x))}, x, self.name)


STRAWMEN = {cls.name: cls for cls in (GreedyReducer, TowardOccupied, TowardUnoccupied, MoveAcross, LowestLabel)}


def build_algorithm(name: str, topology: Optional[Topology] = None) -> GatheringAlgorithm:
    """
    Instantiate an algorithm by name.

    "auto" picks the gathering algorithm matching the topology; strawmen may
    be given as "strawman:<name>".
    """
    if name.startswith("strawman:"):
        name = name.split(":", 1)[1]
    if name == "auto":
        if isinstance(topology, Hypercube):
            name = "hypercube"
        elif isinstance(topology, SquareGrid):
            name = "grid"
        else:
            raise InputError("No default algorithm for this topology")
    if name == "hypercube":
        return HypercubeGathering()
    if name == "grid":
        return GridGathering()
    if name in STRAWMEN:
        return STRAWMEN[name]()
    known = ", ".join(["hypercube", "grid"] + sorted(STRAWMEN))
    raise InputError(f"Unknown algorithm '{name}' (expected one of: {known})")


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

@dataclass
class AdversaryScenario:
    """A hidden placement and fixed activation order with the outcome it should produce."""
    name: str
    topology: Topology
    placement: Placement
    schedule: Schedule
    algorithm: str
    expected: str
    rationale: str
    script: Dict[Vertex, Vertex] = field(default_factory=dict)
    horizon_epochs: int = 4

    @property
    def configuration(self) -> Configuration:
        return Configuration(self.topology, self.placement.occupied)


@dataclass(frozen=True)
class P3Class:
    """Automorphism class of 3-vertex paths centered at one vertex."""
    name: str
    center: Vertex
    paths: FrozenSet[FrozenSet[Vertex]]


@dataclass
class ProofOutcome:
    status: str
    result: Optional[RunResult] = None
    certificate: Optional[RecurrenceCertificate] = None
    certificate_valid: bool = False
    witness: Optional[str] = None


def _robots_by_vertex(placement: Placement) -> Dict[Vertex, List[int]]:
    robots: Dict[Vertex, List[int]] = {}
    for robot, vertex in enumerate(placement.robot_positions()):
        robots.setdefault(vertex, []).append(robot)
    return robots


def _default_edge(topology: Topology) -> Tuple[Vertex, Vertex]:
    if isinstance(topology, Hypercube):
        origin = (0,) * topology.dimension
        return origin, origin[:-1] + (1,)
    if isinstance(topology, SquareGrid):
        return (0, 0), (0, 1)
    if isinstance(topology, GraphTopology):
        return min(tuple(sorted(e)) for e in topology.graph.edges)
    raise InputError(f"No default edge for topology '{topology.kind}'")


def p2_scenario(topology: Topology, edge: Optional[Tuple[Vertex, Vertex]] = None,
                algorithm: str = "greedy") -> AdversaryScenario:
    """Two robots on u, one on v, the first activation at u, then v, then u again."""
    u, v = edge or _default_edge(topology)
    if v not in topology.neighbors(u):
        raise InputError(f"{u!r} and {v!r} are not adjacent")
    placement = Placement.from_counts({u: 2, v: 1})
    robots = _robots_by_vertex(placement)
    schedule = Schedule((robots[u][0], robots[v][0], robots[u][1]))
    return AdversaryScenario(
        name="p2",
        topology=topology,
        placement=placement,
        schedule=schedule,
        algorithm=algorithm,
        expected=Verdict.RECURRENCE_DETECTED.value,
        rationale="two adjacent occupied vertices stay two adjacent occupied vertices under any distance-reducing move",
        horizon_epochs=3,
    )


def _hamiltonian_cycle(digraph: nx.DiGraph, start: Vertex) -> Optional[List[Vertex]]:
    n = digraph.number_of_nodes()
    path = [start]
    on_path = {start}

    def extend() -> bool:
        if len(path) == n:
            return digraph.has_edge(path[-1], start)
        for nxt in sorted(digraph.successors(path[-1])):
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            if extend():
                return True
            path.pop()
            on_path.discard(nxt)
        return False

    return list(path) if extend() else None


def full_graph_scenario(topology: Topology, algorithm: Optional[GatheringAlgorithm] = None,
                        algorithm_name: str = "toward-occupied") -> AdversaryScenario:
    """
    Every vertex occupied, one of them twice, chased along the algorithm's moves.

    The activation order follows a directed Hamiltonian cycle of the offer
    digraph of the full configuration, so the active robot always stands on
    the vertex the previous robot just entered.

    Raises:
        ScenarioInapplicableError: If no fixed order realizes the chase
    """
    if not topology.is_finite:
        raise InputError("The full-graph scenario needs a finite topology")
    algorithm = algorithm or build_algorithm(algorithm_name, topology)
    vertices = topology.vertices()
    if len(vertices) > MAX_CHASE_VERTICES:
        raise CapabilityError("Hamiltonian chase search is exhaustive", estimate=len(vertices))

    full = Configuration(topology, frozenset(vertices))
    digraph = nx.DiGraph()
    digraph.add_nodes_from(vertices)
    for x in vertices:
        for y in algorithm.offer(Snapshot(full, x)).destinations:
            if y != x:
                digraph.add_edge(x, y)

    start = vertices[0]
    counts = {v: 1 for v in vertices}
    counts[start] = 2
    placement = Placement.from_counts(counts)
    robots = _robots_by_vertex(placement)

    if digraph.number_of_edges() == 0:
        return AdversaryScenario(
            name="full",
            topology=topology,
            placement=placement,
            schedule=Schedule.identity(placement.k),
            algorithm=algorithm.name,
            expected=Verdict.RECURRENCE_DETECTED.value,
            rationale="every robot stays put on the fully occupied graph",
            horizon_epochs=2,
        )

    cycle = _hamiltonian_cycle(digraph, start)
    if cycle is None:
        raise ScenarioInapplicableError(
            f"No fixed activation order chases {algorithm.name} around the full {topology.kind}"
        )
    first, second = robots[start]
    order = (first,) + tuple(robots[v][0] for v in cycle[1:]) + (second,)
    script = {cycle[i]: cycle[(i + 1) % len(cycle)] for i in range(len(cycle))}
    return AdversaryScenario(
        name="full",
        topology=topology,
        placement=placement,
        schedule=Schedule(order),
        algorithm=algorithm.name,
        expected=Verdict.RECURRENCE_DETECTED.value,
        rationale="the doubled vertex travels around a Hamiltonian cycle and the graph stays full",
        script=script,
        horizon_epochs=len(vertices) + 1,
    )


def clique_bipartite_scenarios(n: int) -> List[AdversaryScenario]:
    """K_n and K_{n,n} instances for both branches of the occupied/unoccupied dichotomy."""
    if n < 3:
        raise InputError(f"Clique and bipartite scenarios need n >= 3, got {n}")
    k_n = clique(n)
    k_nn = complete_bipartite(n)
    chase = Schedule((0, 2, 1, 3))
    scenarios = []
    for topology, placement, label in (
        (k_n, Placement.from_counts({0: 2, 1: 2}), "clique"),
        (k_nn, Placement.from_counts({0: 2, n: 2}), "bipartite"),
    ):
        scenarios.append(AdversaryScenario(
            name=f"{label}-occupied",
            topology=topology,
            placement=placement,
            schedule=chase,
            algorithm=TowardOccupied.name,
            expected=Verdict.RECURRENCE_DETECTED.value,
            rationale="moves onto occupied vertices never empty one under this order",
            horizon_epochs=4,
        ))
        scenarios.append(AdversaryScenario(
            name=f"{label}-unoccupied",
            topology=topology,
            placement=placement,
            schedule=chase,
            algorithm=TowardUnoccupied.name,
            expected=Verdict.RECURRENCE_DETECTED.value,
            rationale="moves onto unoccupied vertices never decrease the number of occupied vertices",
            horizon_epochs=len(topology.vertices()) ** placement.k,
        ))
    one_side = Placement.from_counts({0: 2, 1: 1})
    scenarios.append(AdversaryScenario(
        name="bipartite-one-side",
        topology=k_nn,
        placement=one_side,
        schedule=Schedule.identity(one_side.k),
        algorithm=MoveAcross.name,
        expected=Verdict.GATHERED.value,
        rationale="all robots on one side form a nice star around every vertex across",
        horizon_epochs=2,
    ))
    return scenarios


def clique_fill_scenario(n: int) -> AdversaryScenario:
    """n + 1 robots on K_n moving toward unoccupied vertices end on a full clique."""
    if n < 3:
        raise InputError(f"Clique fill needs n >= 3, got {n}")
    placement = Placement.from_counts({0: n, 1: 1})
    return AdversaryScenario(
        name="clique-fill",
        topology=clique(n),
        placement=placement,
        schedule=Schedule.identity(placement.k),
        algorithm=TowardUnoccupied.name,
        expected=Verdict.RECURRENCE_DETECTED.value,
        rationale="filling the clique reaches the all-occupied dead end",
        horizon_epochs=3,
    )


def p3_classes(topology: Topology, center: Vertex) -> List[P3Class]:
    """Orbits of the 3-vertex paths centered at `center` under its stabilizer."""
    around = sorted(topology.neighbors(center))
    paths = {
        frozenset({a, center, b})
        for i, a in enumerate(around)
        for b in around[i + 1:]
        if b not in topology.neighbors(a)
    }
    group = topology.vertex_stabilizer(center)
    classes = []
    remaining = set(paths)
    for path in sorted(paths, key=sorted):
        if path not in remaining:
            continue
        orbit = frozenset(g.apply_set(path) for g in group) & remaining
        remaining -= orbit
        classes.append(P3Class(_p3_name(topology, center, path), center, frozenset(orbit)))
    return classes


def _p3_name(topology: Topology, center: Vertex, path: FrozenSet[Vertex]) -> str:
    if isinstance(topology, SquareGrid):
        a, b = sorted(path - {center})
        collinear = (a[0] + b[0], a[1] + b[1]) == (2 * center[0], 2 * center[1])
        return "straight" if collinear else "bent"
    return "path"


def p3_scenario(topology: Topology, class_name: str = "path") -> AdversaryScenario:
    """A 3-vertex path of the requested class with a hidden multiplicity at its center."""
    if isinstance(topology, Hypercube):
        center, algorithm = (0,) * topology.dimension, "hypercube"
    elif isinstance(topology, SquareGrid):
        center, algorithm = (0, 1), "grid"
    else:
        raise InputError(f"No P3 scenario for topology '{topology.kind}'")
    matching = [c for c in p3_classes(topology, center) if c.name == class_name]
    if not matching:
        raise InputError(f"No P3 class named '{class_name}' for {topology.kind}")
    path = min(matching[0].paths, key=sorted)
    counts = {v: 1 for v in path}
    counts[center] = 2
    placement = Placement.from_counts(counts)
    rejected = class_name in ("path", "bent")
    return AdversaryScenario(
        name=f"p3-{class_name}",
        topology=topology,
        placement=placement,
        schedule=Schedule.identity(placement.k),
        algorithm=algorithm,
        expected="rejected" if rejected else Verdict.GATHERED.value,
        rationale=(
            "this path class is the one the gathering algorithm itself generates"
            if rejected else "this path class is never generated, so it can be gathered"
        ),
        horizon_epochs=8,
    )


def prove_nontermination(
    scenario: AdversaryScenario,
    algorithm: Optional[GatheringAlgorithm] = None,
    resolver: Optional[Resolver] = None,
    horizon_epochs: Optional[int] = None,
    log_dir: str = "logs",
    enforce_initial: bool = True,
) -> ProofOutcome:
    """
    Run a scenario and turn the outcome into a verdict.

    Returns status "recurrence" with a checked certificate, "gathered",
    "rejected" when the initial configuration is refused, or "inconclusive".
    With enforce_initial off, a placement in the ungatherable set is run as
    given, which is how the two-robot behaviour of a real algorithm is replayed.
    """
    algorithm = algorithm or build_algorithm(scenario.algorithm, scenario.topology)
    if resolver is None:
        resolver = ScriptedResolver(scenario.script) if scenario.script else CanonicalResolver()
    engine = SwarmEngine(scenario.topology, algorithm, resolver, log_dir=log_dir)
    try:
        result = engine.run(scenario.placement, scenario.schedule, horizon_epochs or scenario.horizon_epochs,
                            enforce_initial=enforce_initial)
    except UngatherableInitialError as e:
        return ProofOutcome(status="rejected", witness=e.witness)

    if result.verdict is Verdict.GATHERED:
        return ProofOutcome(status="gathered", result=result)
    if result.verdict is Verdict.RECURRENCE_DETECTED:
        certificate = result.certificate
        return ProofOutcome(
            status="recurrence",
            result=result,
            certificate=certificate,
            certificate_valid=certificate.verify(scenario.topology, algorithm),
        )
    return ProofOutcome(status="inconclusive", result=result)


def check_nice_star_necessity(result: RunResult) -> CheckResult:
    """A gathered run from three or more occupied vertices must pass through a nice star."""
    initial = result.initial_placement
    if not result.gathered or len(initial.occupied) < 3:
        return CheckResult(True, "skipped: needs a gathered run from at least three occupied vertices", skipped=True)
    for index, step in enumerate(result.trace):
        if is_nice_star(step.configuration):
            return CheckResult(True, f"nice star at round {step.round}", witness=index)
    return CheckResult(False, "gathered without passing through a nice star", witness=len(result.trace))


def check_two_robot_compliance(algorithm: GatheringAlgorithm, topology: Topology,
                               pairs: Optional[List[Tuple[Vertex, Vertex]]] = None) -> CheckResult:
    """
    With two occupied vertices every offered move must shrink their distance,
    and at least one of the two robots must move.
    """
    if pairs is None:
        if not topology.is_finite:
            raise InputError("Explicit pairs are required on an infinite topology")
        vertices = topology.vertices()
        pairs = [(a, b) for i, a in enumerate(vertices) for b in vertices[i + 1:]]
    for a, b in pairs:
        configuration = Configuration(topology, frozenset({a, b}))
        apart = topology.distance(a, b)
        movers = 0
        for x, other in ((a, b), (b, a)):
            offer = algorithm.offer(Snapshot(configuration, x))
            if offer.is_nil(x):
                continue
            movers += 1
            for y in offer.destinations:
                if y != x and topology.distance(y, other) >= apart:
                    return CheckResult(False, f"move {x!r} -> {y!r} does not approach {other!r}", witness=(a, b))
        if not movers:
            return CheckResult(False, f"neither robot moves at {a!r}, {b!r}", witness=(a, b))
    return CheckResult(True, f"{len(pairs)} pairs comply")
