import pytest

from conftest import KIND_IDS

from leadharness import listing, puzzle
from leadharness.checkers import CheckersMove
from leadharness.hanoi import HanoiMove
from leadharness.listing import MALFORMED, OK, TRUNCATED, parse_solution_text
from leadharness.step import CHECKERS, HANOI, Step, format_listing


HANOI_LISTING = '''\
Let me work through this carefully.

solution = [
{'step_id': 1, 'move': [1, 0, 2], 'state': [[3, 2], [], [1]]},
{'step_id': 2, 'move': [2, 0, 1], 'state': [[3], [2], [1]]},
{'step_id': 3, 'move': [1, 2, 1], 'state': [[3], [2, 1], []]},
{'step_id': 4, 'move': [3, 0, 2], 'state': [[], [2, 1], [3]]},
{'step_id': 5, 'move': [1, 1, 0], 'state': [[1], [2], [3]]},
{'step_id': 6, 'move': [2, 1, 2], 'state': [[1], [], [3, 2]]},
{'step_id': 7, 'move': [1, 0, 2], 'state': [[], [], [3, 2, 1]]}
]
'''


def test_single_record_with_new_state():
    text = ("solution = {'move': ['B', 3, 1], "
            "'new_state': ['R', 'B', 'R', '_', 'B']}")
    steps, status = parse_solution_text(text, CHECKERS, 1)
    assert status == OK
    assert steps == [Step(CheckersMove('B', 3, 1), tuple('RBR_B'))]


def test_hanoi_listing():
    steps, status = parse_solution_text(HANOI_LISTING, HANOI)
    assert status == OK
    assert steps == list(puzzle.oracle_trajectory(HANOI, 3))
    assert steps[3].move == HanoiMove(3, 0, 2)


@pytest.mark.parametrize(
    "text", [
        "garbage",
        "",
        None,
        "solution = [{'move': [1, 0, 2], 'state': [[3, 2], [], [1]]}",
        "solution = 'no idea'",
        "solution = [{'move': [1, 0], 'state': [[3, 2], [], [1]]}]",
        "solution = [{'state': [[3, 2], [], [1]]}]",
    ])
def test_malformed(text):
    assert parse_solution_text(text, HANOI) == ([], MALFORMED)


def test_last_assignment_wins():
    text = '''\
First draft:
solution = [{'move': [1, 0, 1], 'state': [[3, 2], [1], []]}]
Wait, that is wrong for an odd disk count.
solution = [{'move': [1, 0, 2], 'state': [[3, 2], [], [1]]}]
'''
    steps, status = parse_solution_text(text, HANOI, 1)
    assert status == OK
    assert steps[0].move == HanoiMove(1, 0, 2)


def test_broken_last_draft_falls_back():
    text = '''\
solution = [{'move': [1, 0, 2], 'state': [[3, 2], [], [1]]}]
and then solution = [{'move': [2, 0, 1], 'state': [[3], [2], [1]]
'''
    steps, status = parse_solution_text(text, HANOI, 1)
    assert status == OK
    assert steps[0].move == HanoiMove(1, 0, 2)


def test_trailing_commas_and_moves_name():
    text = '''\
moves = [
    {'move': ['R', 0, 1], 'state': ['_', 'R', 'B'],},
    {'move': ['B', 2, 0], 'state': ['B', 'R', '_'],},
]'''
    steps, status = parse_solution_text(text, CHECKERS)
    assert status == OK
    assert [s.state for s in steps] == [tuple('_RB'), tuple('BR_')]


def test_other_names_ignored():
    text = "warmup = [{'move': [1, 0, 2], 'state': [[2], [], [1]]}]"
    assert parse_solution_text(text, HANOI) == ([], MALFORMED)


def test_expectation():
    steps, status = parse_solution_text(HANOI_LISTING, HANOI, 3)
    assert status == OK
    assert [s.step_id for s in steps] == [1, 2, 3]
    steps, status = parse_solution_text(HANOI_LISTING, HANOI, 8)
    assert status == TRUNCATED
    assert len(steps) == 7


def test_empty_listing_is_truncated():
    assert parse_solution_text("solution = []", HANOI) == ([], TRUNCATED)


def test_new_step_id():
    text = ("solution = {'new_step_id': 4, 'move': [3, 0, 2], "
            "'new_state': [[], [2, 1], [3]]}")
    [step], status = parse_solution_text(text, HANOI, 1)
    assert status == OK
    assert step.step_id == 4


def test_claimed_state_kept_when_wrong():
    # A claimed state that breaks the puzzle rules is still a readable step
    text = "solution = {'move': [1, 0, 2], 'state': [[3], [], [1]]}"
    [step], status = parse_solution_text(text, HANOI, 1)
    assert status == OK
    assert step.state == ((3,), (), (1,))


def test_quoted_brackets_do_not_confuse_matching():
    text = ("note: ']' closes it\n"
            "solution = [{'move': ['R', 0, 1], 'state': ['_', 'R', 'B']}]")
    steps, status = parse_solution_text(text, CHECKERS)
    assert status == OK
    assert len(steps) == 1


@pytest.mark.parametrize("kind", KIND_IDS)
@pytest.mark.parametrize("with_step_id", [False, True])
def test_listing_reads_back(kind, with_step_id):
    '''The rendered oracle listing parses back to the same steps.'''
    expected = puzzle.oracle_trajectory(kind, 3)
    text = format_listing(expected, with_step_id=with_step_id)
    steps, status = parse_solution_text(text, kind)
    assert status == OK
    if with_step_id:
        assert steps == list(expected)
    else:
        assert [s.key() for s in steps] == [s.key() for s in expected]


def test_find_solutions_order():
    text = ("solution = [{'move': [1, 0, 2], 'state': [[2], [], [1]]}]\n"
            "moves = [{'move': [1, 0, 1], 'state': [[2], [1], []]}]")
    found = list(listing.find_solutions(text, HANOI))
    assert [steps[0].move for steps in found] == [
        HanoiMove(1, 0, 1), HanoiMove(1, 0, 2)]
