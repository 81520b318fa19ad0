import pytest

from adversary import check_two_robot_compliance
from errors import InputError, UngatherableInitialError
from gather_grid import EXPECTED_TRANSITIONS, GTask, MbrShape, USTWitness, classify_st, move_st, ust_witness
from swarm import Configuration, Placement, Schedule, Snapshot, Verdict


def config(grid, *vertices):
    return Configuration(grid, frozenset(vertices))


def offer(grid, occupied, position):
    return move_st(Snapshot(Configuration(grid, frozenset(occupied)), position))


class TestWitnesses:
    def test_one_by_two(self, grid):
        assert ust_witness(config(grid, (0, 0), (0, 1))) is USTWitness.ONE_BY_TWO
        assert ust_witness(config(grid, (4, 4), (5, 4))) is USTWitness.ONE_BY_TWO

    def test_three_in_a_square(self, grid):
        assert ust_witness(config(grid, (0, 0), (0, 1), (1, 0))) is USTWitness.TWO_BY_TWO_THREE

    def test_gatherable(self, grid):
        assert ust_witness(config(grid, (0, 0), (1, 1))) is USTWitness.NONE
        assert ust_witness(config(grid, (0, 0), (0, 1), (1, 0), (1, 1))) is USTWitness.NONE
        assert ust_witness(config(grid, (0, 0), (0, 2))) is USTWitness.NONE

    def test_requires_grid(self, q3):
        with pytest.raises(InputError):
            ust_witness(config(q3, (0, 0, 0), (0, 1, 1)))


class TestClassification:
    @pytest.mark.parametrize("vertices, task", [
        ([(0, 0), (0, 1)], GTask.T4),
        ([(0, 0), (1, 1)], GTask.T4),
        ([(0, 0), (0, 1), (1, 0)], GTask.T4),
        ([(0, 0), (0, 1), (1, 0), (1, 1)], GTask.T1),
        ([(0, 0), (0, 3)], GTask.T1),
        ([(0, 0), (0, 2), (2, 0), (2, 2)], GTask.T1),
        ([(0, 0), (2, 1)], GTask.T3),
        ([(0, 0), (1, 2)], GTask.T3),
        ([(0, 0), (2, 2)], GTask.T2),
        ([(0, 0), (2, 3), (1, 1)], GTask.T2),
    ])
    def test_tasks(self, grid, vertices, task):
        assert classify_st(config(grid, *vertices)) is task

    def test_gathered(self, grid):
        assert classify_st(config(grid, (3, 3))) is None

    def test_mbr_shape(self):
        shape = MbrShape.of(frozenset({(0, 0), (2, 3)}))
        assert (shape.short, shape.long) == (3, 4)
        assert shape.occupied_corners == {(0, 0), (2, 3)}
        assert shape.empty_corners == {(0, 3), (2, 0)}
        assert not shape.all_corners_occupied


class TestOffers:
    def test_diagonal_moves_to_either_empty_corner(self, grid):
        result = offer(grid, {(0, 0), (1, 1)}, (0, 0))
        assert result.task == "T4"
        assert result.destinations == {(0, 1), (1, 0)}

    def test_three_in_a_square_move_to_the_center(self, grid):
        occupied = {(0, 0), (0, 1), (1, 0)}
        assert offer(grid, occupied, (0, 1)).destinations == {(0, 0)}
        assert offer(grid, occupied, (1, 0)).destinations == {(0, 0)}
        assert offer(grid, occupied, (0, 0)).is_nil((0, 0))

    def test_adjacent_pair_swaps(self, grid):
        assert offer(grid, {(0, 0), (0, 1)}, (0, 0)).destinations == {(0, 1)}

    def test_lines_step_off_line(self, grid):
        assert offer(grid, {(0, 0), (0, 3)}, (0, 0)).destinations == {(-1, 0), (1, 0)}
        assert offer(grid, {(0, 0), (3, 0)}, (3, 0)).destinations == {(3, -1), (3, 1)}

    def test_full_corners_push_outward(self, grid):
        corners = {(0, 0), (0, 2), (2, 0), (2, 2)}
        assert offer(grid, corners, (0, 0)).destinations == {(-1, 0), (0, -1)}

    def test_square_shrinks_from_every_side(self, grid):
        assert offer(grid, {(0, 0), (2, 2)}, (0, 0)).destinations == {(1, 0), (0, 1)}

    def test_rectangle_shrinks_its_short_sides(self, grid):
        occupied = {(0, 0), (2, 3)}
        assert offer(grid, occupied, (0, 0)).destinations == {(0, 1)}
        assert offer(grid, occupied, (2, 3)).destinations == {(2, 2)}

    def test_window_pattern_has_a_mover(self, grid):
        occupied = {(0, 0), (2, 1)}
        moves = [offer(grid, occupied, v) for v in occupied]
        assert all(m.task == "T3" for m in moves)
        assert any(not m.is_nil(v) for m, v in zip(moves, occupied))

    def test_two_robot_compliance(self, grid, grid_algorithm):
        pairs = [((0, 0), (0, 1)), ((0, 0), (1, 1)), ((2, 3), (3, 2)), ((5, 5), (6, 5))]
        result = check_two_robot_compliance(grid_algorithm, grid, pairs)
        assert result.passed, result.message

    def test_measure(self, grid, grid_algorithm):
        assert grid_algorithm.measure(config(grid, (0, 0), (2, 3))) == 7


class TestRuns:
    def test_diagonal_gathers_in_one_epoch(self, grid_engine):
        placement = Placement.from_counts({(0, 0): 1, (1, 1): 1})
        result = grid_engine.run(placement, Schedule.identity(2), 6)
        assert result.verdict is Verdict.GATHERED
        assert result.epochs_used == 1
        assert result.final_positions == ((0, 1), (0, 1))

    def test_adjacent_start_is_rejected(self, grid_engine):
        with pytest.raises(UngatherableInitialError) as excinfo:
            grid_engine.run(Placement.from_counts({(0, 0): 1, (0, 1): 1}), Schedule.identity(2), 4)
        assert excinfo.value.witness == "1x2"

    def test_expected_transitions_end_in_gathering(self):
        assert "GATHERED" in EXPECTED_TRANSITIONS["T4"]
        assert set(EXPECTED_TRANSITIONS) == {t.value for t in GTask}
