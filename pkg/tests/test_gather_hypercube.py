import pytest

import gather_hypercube
from adversary import check_two_robot_compliance
from errors import InputError
from gather_hypercube import (ALLOWED_TASK_CYCLES, EXPECTED_TRANSITIONS, DmaKind, HTask, HypercubeGathering,
                              UHWitness, bound_dimension, classify_h, dma, l_sets, move_h, uh_witness)
from swarm import Configuration, Snapshot
from topology import Hypercube, axis_splits, mbh, vertices_of_mask


def config(cube, *vertices):
    return Configuration(cube, frozenset(vertices))


def q4_face_plus_one():
    """Every vertex with first bit 0, plus 1000."""
    cube = Hypercube(4)
    face = [v for v in cube.vertices() if v[0] == 0]
    return cube, frozenset(face) | {(1, 0, 0, 0)}


class TestWitnesses:
    def test_adjacent_pair(self, q3):
        assert uh_witness(config(q3, (0, 0, 0), (0, 0, 1))) is UHWitness.P2

    def test_induced_path(self, q3):
        assert uh_witness(config(q3, (0, 0, 0), (0, 0, 1), (0, 1, 1))) is UHWitness.P3

    def test_full_cube(self, q3):
        assert uh_witness(Configuration(q3, frozenset(q3.vertices()))) is UHWitness.FULL

    def test_gatherable(self, q3, q4):
        assert uh_witness(config(q3, (0, 0, 0), (0, 1, 1))) is UHWitness.NONE
        face = frozenset(v for v in q4.vertices() if v[3] == 0)
        assert uh_witness(Configuration(q4, face)) is UHWitness.NONE

    def test_algorithm_reports_witness_names(self, q3, hypercube_algorithm):
        assert hypercube_algorithm.ungatherable_witness(config(q3, (0, 0, 0), (1, 0, 0))) == "P2"
        assert hypercube_algorithm.ungatherable_witness(config(q3, (0, 0, 0), (1, 1, 1))) is None

    def test_requires_hypercube(self, grid):
        with pytest.raises(InputError):
            uh_witness(config(grid, (0, 0), (0, 1)))


class TestClassification:
    def test_gathered_has_no_task(self, q3):
        assert classify_h(config(q3, (1, 1, 1))) is None

    def test_small_bound_uses_endgame(self, q3, q4):
        assert classify_h(config(q3, (0, 0, 0), (0, 1, 1))) is HTask.T1
        assert classify_h(config(q4, (0, 0, 0, 0), (0, 1, 1, 0))) is HTask.T1

    def test_antipodal_q4_pair(self, q4):
        configuration = config(q4, (0, 0, 0, 0), (1, 1, 1, 1))
        sets = l_sets(configuration)
        assert len(sets.l0) == 8
        assert sets.l1 == ()
        assert classify_h(configuration) is HTask.T6

    def test_full_q3_face_in_q4(self, q4):
        face = frozenset(v for v in q4.vertices() if v[3] == 0)
        assert classify_h(Configuration(q4, face)) is HTask.T8

    def test_full_face_plus_one_fails_direct_move(self):
        cube, occupied = q4_face_plus_one()
        configuration = Configuration(cube, occupied)
        sets = l_sets(configuration)
        assert len(sets.l0) == 1
        verdict = sets.l0[0].dma
        assert verdict.kind is DmaKind.FAIL_A
        assert verdict.v == (1, 0, 0, 0)
        assert verdict.v_prime == (0, 0, 0, 0)
        assert classify_h(configuration) is HTask.T5I

    def test_l_sets_need_large_bound(self, q3):
        with pytest.raises(InputError):
            l_sets(config(q3, (0, 0, 0), (1, 1, 1)))

    def test_dma_rejects_foreign_split(self, q4):
        configuration = config(q4, (0, 0, 0, 0), (1, 1, 1, 1))
        other = axis_splits(4, mbh(4, [(0, 0, 0, 0), (0, 1, 1, 1)]))[0]
        with pytest.raises(InputError):
            dma(other, configuration)

    def test_bound_dimension_is_the_measure(self, q4, hypercube_algorithm):
        configuration = config(q4, (0, 0, 0, 0), (0, 1, 1, 0))
        assert bound_dimension(configuration) == 2
        assert hypercube_algorithm.measure(configuration) == 2


class TestOffers:
    def test_t6_moves_toward_every_hole(self, q4):
        configuration = config(q4, (0, 0, 0, 0), (1, 1, 1, 1))
        offer = move_h(Snapshot(configuration, (0, 0, 0, 0)))
        assert offer.task == "T6"
        assert offer.destinations == {(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)}

    def test_t8_leaves_the_face(self, q4):
        face = frozenset(v for v in q4.vertices() if v[3] == 0)
        offer = move_h(Snapshot(Configuration(q4, face), (0, 1, 0, 0)))
        assert offer.task == "T8"
        assert offer.destinations == {(0, 1, 0, 1)}

    def test_t5i_joins_the_lonely_robot(self):
        cube, occupied = q4_face_plus_one()
        configuration = Configuration(cube, occupied)
        assert move_h(Snapshot(configuration, (0, 0, 0, 0))).destinations == {(1, 0, 0, 0)}
        assert move_h(Snapshot(configuration, (1, 0, 0, 0))).is_nil((1, 0, 0, 0))
        assert move_h(Snapshot(configuration, (0, 1, 1, 0))).is_nil((0, 1, 1, 0))

    def test_endgame_embeds_lower_dimensional_bound(self, q4):
        configuration = config(q4, (0, 0, 0, 0), (0, 1, 1, 0))
        offer = move_h(Snapshot(configuration, (0, 0, 0, 0)))
        assert offer.destinations == {(0, 1, 0, 0), (0, 0, 1, 0)}

    def test_gathered_is_nil(self, q3):
        assert move_h(Snapshot(config(q3, (0, 1, 0)), (0, 1, 0))).is_nil((0, 1, 0))

    def test_full_q3_stays_put(self, q3):
        full = Configuration(q3, frozenset(q3.vertices()))
        assert move_h(Snapshot(full, (1, 0, 1))).is_nil((1, 0, 1))

    def test_two_robot_compliance(self, q3, hypercube_algorithm):
        result = check_two_robot_compliance(hypercube_algorithm, q3)
        assert result.passed, result.message


class TestTaskTables:
    def test_every_task_has_expected_successors(self):
        assert set(EXPECTED_TRANSITIONS) == {t.value for t in HTask}

    def test_allowed_cycles_start_with_t2(self):
        assert all(cycle[0] == "T2" for cycle in ALLOWED_TASK_CYCLES)
        assert HypercubeGathering.name == "hypercube"


def bits(*labels):
    """Q4 vertices written as bit strings, first character = axis 0."""
    return frozenset(tuple(int(c) for c in label) for label in labels)


def offers(configuration, *labels):
    return {label: move_h(Snapshot(configuration, next(iter(bits(label))))) for label in labels}


class TestTaskPlacements:
    """One hand-built Q4 placement per task of the split phase, with exact offers."""

    def test_t2_single_allowed_split(self, q4):
        configuration = Configuration(q4, bits("0000", "1100", "1010", "1001", "1111"))
        sets = l_sets(configuration)
        assert len(sets.l2) == 1
        assert sets.l2[0].split.axis == 0
        assert classify_h(configuration) is HTask.T2
        offered = offers(configuration, "0000", "1100", "1111")
        assert offered["0000"].task == "T2"
        assert offered["0000"].destinations == bits("1000")
        assert offered["1100"].is_nil((1, 1, 0, 0))
        assert offered["1111"].is_nil((1, 1, 1, 1))

    def test_t3_moves_into_holes_of_every_split(self, q4):
        configuration = Configuration(q4, bits("0000", "1100", "1110", "1101", "1111"))
        sets = l_sets(configuration)
        assert [s.split.axis for s in sets.l2] == [0, 1]
        assert len(sets.l3) == 2
        assert classify_h(configuration) is HTask.T3
        offered = offers(configuration, "0000", "1110")
        assert offered["0000"].task == "T3"
        assert offered["0000"].destinations == bits("1000", "0100")
        assert offered["1110"].is_nil((1, 1, 1, 0))

    def test_t4_crosses_onto_occupied_vertices(self, q4):
        configuration = Configuration(q4, bits("0000", "1000", "0100", "1100", "1110", "1101", "1111"))
        sets = l_sets(configuration)
        assert len(sets.l2) == 4
        assert sets.l3 == ()
        assert classify_h(configuration) is HTask.T4
        offered = offers(configuration, "0000", "0100", "1110", "1111", "1100")
        assert offered["0000"].task == "T4"
        assert offered["0000"].destinations == bits("1000", "0100")
        assert offered["0100"].destinations == bits("1100")
        assert offered["1110"].destinations == bits("1100")
        assert offered["1111"].destinations == bits("1101", "1110")
        assert offered["1100"].is_nil((1, 1, 0, 0))

    def test_t5ii_lonely_robot_steps_aside(self, q4):
        target_side = [label for label in ("1" + f"{i:03b}" for i in range(8)) if label != "1000"]
        configuration = Configuration(q4, bits("0000", *target_side))
        verdict = l_sets(configuration).l1[0].dma
        assert verdict.kind is DmaKind.FAIL_B
        assert verdict.w == (1, 0, 0, 0)
        assert classify_h(configuration) is HTask.T5II
        offered = offers(configuration, "0000", "1100")
        assert offered["0000"].task == "T5ii"
        assert offered["0000"].destinations == bits("0100", "0010", "0001")
        assert offered["1100"].is_nil((1, 1, 0, 0))

    def test_t5iii_pair_merges_away_from_the_hole(self, q4):
        target_side = [label for label in ("1" + f"{i:03b}" for i in range(8)) if label != "1000"]
        configuration = Configuration(q4, bits("0000", "0100", *target_side))
        verdict = l_sets(configuration).l1[0].dma
        assert verdict.kind is DmaKind.FAIL_C
        assert (verdict.v, verdict.v_prime) == ((0, 0, 0, 0), (0, 1, 0, 0))
        assert classify_h(configuration) is HTask.T5III
        offered = offers(configuration, "0000", "0100")
        assert offered["0000"].task == "T5iii"
        assert offered["0000"].destinations == bits("0100")
        assert offered["0100"].is_nil((0, 1, 0, 0))

    def test_t7_moves_stay_inside_the_source(self, q4, monkeypatch):
        configuration = Configuration(q4, bits("0000", "1000", "0100", "1100", "1110", "1101", "1111"))
        analysis = gather_hypercube._analysis
        monkeypatch.setattr(gather_hypercube, "_analysis", lambda c: (HTask.T7, analysis(c)[1]))
        offered = offers(configuration, "0000", "1100")
        assert offered["0000"].task == "T7"
        assert offered["0000"].destinations == bits("0010", "0001")
        assert offered["1100"].is_nil((1, 1, 0, 0))

    def test_balanced_configurations_never_need_t7(self, q4):
        # Without L1 every axis is balanced, so every split is in L0
        seen = set()
        for mask in range(1, 1 << 16):
            occupied = vertices_of_mask(mask, 4)
            if all(2 * sum(v[axis] for v in occupied) == len(occupied) for axis in range(4)):
                seen.add(classify_h(Configuration(q4, occupied)))
        assert HTask.T7 not in seen
        assert {HTask.T6, HTask.T8} <= seen
