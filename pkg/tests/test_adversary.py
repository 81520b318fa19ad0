import pytest

from adversary import (GreedyReducer, LowestLabel, MoveAcross, TowardOccupied, TowardUnoccupied, build_algorithm,
                       build_topology, check_nice_star_necessity, check_two_robot_compliance,
                       clique_bipartite_scenarios, clique_fill_scenario, complete_bipartite, clique,
                       full_graph_scenario, p2_scenario, p3_classes, p3_scenario, prove_nontermination,
                       topology_selector)
from errors import InputError
from gather_grid import GridGathering
from gather_hypercube import HypercubeGathering
from swarm import Configuration, Placement, RunResult, Schedule, TraceStep, Verdict
from topology import Hypercube, SquareGrid


def _scenario(name, n=3):
    return next(s for s in clique_bipartite_scenarios(n) if s.name == name)


def _gathered_result(topology, configurations):
    """A gathered run whose trace visits the given occupied sets in order."""
    steps = []
    for index, occupied in enumerate(configurations, start=1):
        vertex = min(occupied)
        placement = Placement.from_positions(sorted(occupied))
        steps.append(TraceStep(
            round=index, epoch=1, robot=0, placement=placement,
            configuration=Configuration(topology, frozenset(occupied)),
            active_vertex=vertex, destination=vertex,
        ))
    initial = Placement.from_positions(sorted(configurations[0]))
    return RunResult(
        verdict=Verdict.GATHERED, trace=steps, initial_placement=initial,
        final_positions=(min(configurations[-1]),) * initial.k, schedule=Schedule.identity(initial.k),
        rounds=len(steps), epochs_used=1,
    )


class TestGraphs:
    def test_clique(self):
        k4 = clique(4)
        assert k4.vertices() == [0, 1, 2, 3]
        assert k4.neighbors(0) == {1, 2, 3}
        assert k4.distance(1, 3) == 1

    def test_bipartite_sides(self):
        k33 = complete_bipartite(3)
        assert k33.neighbors(0) == {3, 4, 5}
        assert k33.distance(0, 1) == 2
        assert k33.parse_vertex(" 4 ") == 4
        with pytest.raises(InputError):
            k33.parse_vertex("9")

    def test_build_topology(self):
        assert build_topology("hypercube") == Hypercube(3)
        assert build_topology("hypercube", 5) == Hypercube(5)
        assert isinstance(build_topology("grid"), SquareGrid)
        assert topology_selector(build_topology("bipartite", 3)) == ("bipartite", 3)
        assert topology_selector(build_topology("clique", 4)) == ("clique", 4)

    @pytest.mark.parametrize("kind, size", [("clique", None), ("clique", 1), ("torus", 3)])
    def test_build_topology_rejects(self, kind, size):
        with pytest.raises(InputError):
            build_topology(kind, size)


class TestAlgorithms:
    def test_auto_follows_topology(self):
        assert isinstance(build_algorithm("auto", Hypercube(4)), HypercubeGathering)
        assert isinstance(build_algorithm("auto", SquareGrid()), GridGathering)

    def test_strawmen_by_name(self):
        assert isinstance(build_algorithm("greedy"), GreedyReducer)
        assert isinstance(build_algorithm("strawman:toward-occupied"), TowardOccupied)
        assert isinstance(build_algorithm("toward-unoccupied"), TowardUnoccupied)
        assert isinstance(build_algorithm("strawman:move-across"), MoveAcross)
        assert isinstance(build_algorithm("lowest-label"), LowestLabel)

    def test_unknown_algorithm(self):
        with pytest.raises(InputError):
            build_algorithm("teleport")
        with pytest.raises(InputError):
            build_algorithm("auto", clique(3))

    def test_lowest_label_breaks_compliance(self, grid):
        result = check_two_robot_compliance(LowestLabel(), grid, [((0, 0), (0, 1))])
        assert not result.passed

    def test_greedy_complies_with_two_robots(self, q3):
        assert check_two_robot_compliance(GreedyReducer(), q3).passed

    def test_compliance_needs_pairs_on_infinite_graphs(self, grid):
        with pytest.raises(InputError):
            check_two_robot_compliance(GreedyReducer(), grid)


class TestPairScenario:
    @pytest.mark.parametrize("topology", [SquareGrid(), Hypercube(3), Hypercube(4)])
    def test_greedy_recurs_within_two_epochs(self, topology):
        scenario = p2_scenario(topology)
        assert scenario.placement.k == 3
        outcome = prove_nontermination(scenario)
        assert outcome.status == "recurrence"
        assert outcome.certificate_valid
        assert outcome.certificate.loop_start_round == 1
        assert outcome.certificate.span == 6

    def test_gathering_algorithm_refuses_the_pair(self, grid):
        outcome = prove_nontermination(p2_scenario(grid, algorithm="grid"))
        assert outcome.status == "rejected"
        assert outcome.witness == "1x2"

    @pytest.mark.parametrize("topology, name", [
        (Hypercube(3), "hypercube"),
        (Hypercube(4), "hypercube"),
        (SquareGrid(), "grid"),
    ])
    def test_gathering_algorithm_recurs_on_the_pair_when_run_anyway(self, topology, name):
        scenario = p2_scenario(topology, algorithm=name)
        outcome = prove_nontermination(scenario, enforce_initial=False)
        assert outcome.status == "recurrence"
        assert outcome.certificate_valid
        certificate = outcome.certificate
        assert certificate.loop_start_round == 1
        assert certificate.span == 6
        assert certificate.span <= 2 * scenario.placement.k
        assert certificate.verify(topology, build_algorithm(name, topology))
        assert certificate.replay() == certificate.positions

    def test_edge_must_be_an_edge(self, grid):
        with pytest.raises(InputError):
            p2_scenario(grid, ((0, 0), (1, 1)))


class TestCliqueAndBipartite:
    @pytest.mark.parametrize("name", ["clique-occupied", "bipartite-occupied"])
    def test_occupied_moves_recur(self, name):
        outcome = prove_nontermination(_scenario(name))
        assert outcome.status == "recurrence"
        assert outcome.certificate_valid
        assert outcome.certificate.span == 8

    @pytest.mark.parametrize("name", ["clique-unoccupied", "bipartite-unoccupied"])
    def test_unoccupied_moves_never_gather(self, name):
        outcome = prove_nontermination(_scenario(name))
        assert outcome.status == "recurrence"
        assert outcome.certificate_valid

    def test_one_side_gathers(self):
        outcome = prove_nontermination(_scenario("bipartite-one-side"))
        assert outcome.status == "gathered"
        assert outcome.result.epochs_used == 1

    def test_fill_ends_on_full_clique(self):
        outcome = prove_nontermination(clique_fill_scenario(3))
        assert outcome.status == "recurrence"
        assert outcome.result.final_placement.occupied == {0, 1, 2}

    def test_small_n_is_rejected(self):
        with pytest.raises(InputError):
            clique_bipartite_scenarios(2)
        with pytest.raises(InputError):
            clique_fill_scenario(2)


class TestFullGraph:
    def test_q3_chase_recurs_after_a_full_rotation(self, q3):
        scenario = full_graph_scenario(q3)
        assert scenario.placement.k == 9
        assert scenario.placement.occupied == frozenset(q3.vertices())
        assert len(scenario.script) == 8
        outcome = prove_nontermination(scenario)
        assert outcome.status == "recurrence"
        assert outcome.certificate_valid
        assert outcome.certificate.span == 8 * 9

    def test_infinite_topology(self, grid):
        with pytest.raises(InputError):
            full_graph_scenario(grid)

    def test_idle_algorithm_gives_trivial_scenario(self):
        scenario = full_graph_scenario(clique(3), algorithm=TowardUnoccupied())
        assert scenario.script == {}
        assert prove_nontermination(scenario).status == "recurrence"


class TestPaths:
    def test_hypercube_has_one_path_class(self, q3):
        classes = p3_classes(q3, (0, 0, 0))
        assert [c.name for c in classes] == ["path"]
        assert len(classes[0].paths) == 3

    def test_grid_has_two_path_classes(self, grid):
        classes = p3_classes(grid, (0, 1))
        assert sorted(c.name for c in classes) == ["bent", "straight"]
        sizes = {c.name: len(c.paths) for c in classes}
        assert sizes == {"bent": 4, "straight": 2}

    def test_hypercube_path_is_rejected(self, q3):
        outcome = prove_nontermination(p3_scenario(q3))
        assert outcome.status == "rejected"
        assert outcome.witness == "P3"

    def test_bent_grid_path_is_rejected(self, grid):
        outcome = prove_nontermination(p3_scenario(grid, "bent"))
        assert outcome.status == "rejected"
        assert outcome.witness == "2x2-three"

    def test_straight_grid_path_gathers(self, grid):
        scenario = p3_scenario(grid, "straight")
        assert scenario.expected == "gathered"
        outcome = prove_nontermination(scenario)
        assert outcome.status == "gathered"
        assert outcome.result.epochs_used == 2

    def test_unknown_class(self, grid):
        with pytest.raises(InputError):
            p3_scenario(grid, "zigzag")


class TestNiceStarNecessity:
    def test_skips_runs_that_did_not_gather(self, grid):
        outcome = prove_nontermination(p2_scenario(grid))
        check = check_nice_star_necessity(outcome.result)
        assert check.passed and check.skipped

    def test_skips_two_vertex_starts(self, grid):
        result = _gathered_result(grid, [{(0, 0), (1, 1)}, {(0, 1)}])
        assert check_nice_star_necessity(result).skipped

    def test_finds_the_star(self, grid):
        result = _gathered_result(grid, [{(0, 0), (0, 2), (2, 2)}, {(0, 0), (1, 1)}, {(0, 1)}])
        check = check_nice_star_necessity(result)
        assert check.passed
        assert check.witness == 1

    def test_flags_a_run_without_star(self, grid):
        result = _gathered_result(grid, [{(0, 0), (0, 2), (2, 2)}, {(0, 0), (0, 1)}, {(0, 1)}])
        assert not check_nice_star_necessity(result).passed
