'''Tower of Hanoi on three pegs.

A state is a tuple of three pegs, each a tuple of disk numbers listed from
bottom to top (1 is the smallest disk).  The oracle follows the iterative
parity algorithm: even-numbered moves advance disk 1 around a fixed cycle and
odd-numbered moves make the only legal move not involving disk 1.
'''

from typing import List, NamedTuple, Tuple

from .errors import InvalidMove, MalformedState
from .step import Step


State = Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]

PEGS = 3


class HanoiMove(NamedTuple):
    disk: int
    peg_from: int
    peg_to: int


def _check_size(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError('Disk count must be a positive integer, not %r' % n)


def initial(n) -> State:
    _check_size(n)
    return (tuple(range(n, 0, -1)), (), ())


def goal(n) -> State:
    _check_size(n)
    return ((), (), tuple(range(n, 0, -1)))


def size(state):
    '''Returns n for a well formed state, None otherwise.'''
    if len(state) != PEGS:
        return None
    disks = [d for peg in state for d in peg]
    n = len(disks)
    if n < 1 or sorted(disks) != list(range(1, n + 1)):
        return None
    for peg in state:
        if any(a <= b for a, b in zip(peg, peg[1:])):
            return None
    return n


def validate(state, n=None):
    found = size(state)
    if found is None:
        raise MalformedState(
            'State %r is not three strictly decreasing pegs holding disks '
            '1..n' % (state,))
    if n is not None and found != n:
        raise MalformedState('State holds %d disks, expected %d' % (found, n))
    return state


def is_goal(state):
    n = size(state)
    return n is not None and tuple(map(tuple, state)) == goal(n)


def _top(peg):
    return peg[-1] if peg else None


def valid_moves(state) -> List[HanoiMove]:
    '''Every legal move, ordered by (peg_from, peg_to).'''
    if len(state) != PEGS:
        raise MalformedState('State %r does not have three pegs' % (state,))
    moves = []
    for peg_from in range(PEGS):
        disk = _top(state[peg_from])
        if disk is None:
            continue
        for peg_to in range(PEGS):
            if peg_to == peg_from:
                continue
            target = _top(state[peg_to])
            if target is None or target > disk:
                moves.append(HanoiMove(disk, peg_from, peg_to))
    return moves


def apply(state, move) -> State:
    disk, peg_from, peg_to = move
    if len(state) != PEGS:
        raise MalformedState('State %r does not have three pegs' % (state,))
    if not (0 <= peg_from < PEGS and 0 <= peg_to < PEGS):
        raise InvalidMove('No such peg in move %r' % (list(move),))
    if peg_from == peg_to:
        raise InvalidMove('Move %r does not change peg' % (list(move),))
    if disk < 1:
        raise InvalidMove('No disk numbered %r' % (disk,))
    top = _top(state[peg_from])
    if top is None:
        raise InvalidMove('Peg %d is empty' % peg_from)
    if top != disk:
        raise InvalidMove(
            'Disk %d is not on top of peg %d (top is %d)' % (
                disk, peg_from, top))
    target = _top(state[peg_to])
    if target is not None and target < disk:
        raise InvalidMove(
            'Cannot place disk %d on smaller disk %d' % (disk, target))
    pegs = [tuple(peg) for peg in state]
    pegs[peg_from] = pegs[peg_from][:-1]
    pegs[peg_to] = pegs[peg_to] + (disk,)
    return tuple(pegs)


def _cycle(n):
    return (0, 2, 1) if n % 2 else (0, 1, 2)


def oracle_move(state, num_moves_done, n) -> HanoiMove:
    if num_moves_done % 2 == 0:
        for peg_i in range(PEGS):
            if _top(state[peg_i]) == 1:
                break
        else:
            raise InvalidMove('Disk 1 is not on top of any peg')
        cycle = _cycle(n)
        peg_j = cycle[(cycle.index(peg_i) + 1) % PEGS]
        return HanoiMove(1, peg_i, peg_j)
    else:
        infinity = float('inf')

        def top_size(peg):
            top = _top(state[peg])
            return infinity if top is None else top
        # Stable sort, so two empty pegs keep their natural order
        peg_i, peg_j, _ = sorted(range(PEGS), key=top_size, reverse=True)
        disk = _top(state[peg_j])
        if disk is None:
            raise InvalidMove('No disk available for an odd-numbered move')
        return HanoiMove(disk, peg_j, peg_i)


def oracle_next(state, num_moves_done, n) -> Step:
    '''The next step of the optimal solution after num_moves_done moves.
    Raises InvalidMove if state is not on the optimal path.'''
    move = oracle_move(state, num_moves_done, n)
    return Step(move, apply(state, move), num_moves_done + 1)


def oracle_solve(n) -> List[Step]:
    state = initial(n)
    steps = []
    for count in range(optimal_length(n)):
        step = oracle_next(state, count, n)
        steps.append(step)
        state = step.state
    assert is_goal(state), 'Parity algorithm did not reach the goal'
    return steps


def optimal_length(n):
    _check_size(n)
    return 2 ** n - 1
