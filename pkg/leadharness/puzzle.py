'''Puzzle-independent access to the two puzzles.

Functions here take the puzzle kind (`CHECKERS` or `HANOI`) and forward to
the matching module, so that agents and executors never branch on the
puzzle themselves.'''

import functools

from . import checkers, hanoi
from .errors import HarnessError, InvalidMove, MalformedState
from .step import CHECKERS, HANOI, KINDS, Step


_MODULES = {CHECKERS: checkers, HANOI: hanoi}


def module(kind):
    try:
        return _MODULES[kind]
    except KeyError:
        raise ValueError(
            'Unknown puzzle %r, expected one of %s' % (kind, ', '.join(KINDS)))


def initial_state(kind, n):
    return module(kind).initial(n)


def goal_state(kind, n):
    return module(kind).goal(n)


def optimal_length(kind, n):
    return module(kind).optimal_length(n)


def kind_of(state):
    '''Guesses the puzzle from the shape of a state.'''
    if state and all(isinstance(cell, str) for cell in state):
        return CHECKERS
    return HANOI


def is_goal(state):
    return module(kind_of(state)).is_goal(state)


def state_size(kind, state):
    '''n for a well formed state, None for a malformed one.'''
    try:
        return module(kind).size(state)
    except (TypeError, ValueError):
        return None


def apply_move(kind, state, move):
    return module(kind).apply(state, move)


def valid_moves(kind, state):
    return module(kind).valid_moves(state)


def make_move(kind, values):
    '''Builds a typed move from a parsed [a, b, c] list.  Raises ValueError
    if the values cannot form a move of this puzzle.'''
    if len(values) != 3:
        raise ValueError('A move has three items, not %d' % len(values))
    if kind == CHECKERS:
        color, from_pos, to_pos = values
        if color not in (checkers.RED, checkers.BLUE) \
                or not _is_int(from_pos) or not _is_int(to_pos):
            raise ValueError('Bad checkers move %r' % (values,))
        return checkers.CheckersMove(color, int(from_pos), int(to_pos))
    else:
        if not all(_is_int(v) for v in values):
            raise ValueError('Bad hanoi move %r' % (values,))
        return hanoi.HanoiMove(*(int(v) for v in values))


def make_state(kind, values):
    '''Builds a canonical (tuple) state from parsed lists, without checking
    the puzzle invariants.'''
    if kind == CHECKERS:
        if not all(cell in checkers.CELLS for cell in values):
            raise ValueError('Bad checkers board %r' % (values,))
        return tuple(values)
    else:
        pegs = []
        for peg in values:
            if not isinstance(peg, (list, tuple)) \
                    or not all(_is_int(d) for d in peg):
                raise ValueError('Bad hanoi state %r' % (values,))
            pegs.append(tuple(int(d) for d in peg))
        return tuple(pegs)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def step_from_json(kind, record):
    '''Rebuilds a Step from its JSON form.  With kind None the puzzle is
    told from the move: checkers moves start with a colour.'''
    if kind is None:
        kind = CHECKERS if isinstance(record['move'][0], str) else HANOI
    return Step(
        make_move(kind, record['move']),
        make_state(kind, record['state']),
        record.get('step_id'))


@functools.lru_cache(maxsize=None)
def oracle_trajectory(kind, n):
    '''The oracle solution as a tuple of steps with 1-based step ids.'''
    return tuple(module(kind).oracle_solve(n))


@functools.lru_cache(maxsize=None)
def trajectory_states(kind, n):
    '''(states, index): states[i] is the state before step i (the last entry
    is the goal) and index maps each state back to its position.'''
    states = [initial_state(kind, n)]
    states.extend(step.state for step in oracle_trajectory(kind, n))
    return tuple(states), {state: i for i, state in enumerate(states)}


def policy_step(kind, state, index, n):
    '''The step the oracle strategy takes from state when it is the move at
    0-based position index.  Unlike the oracle trajectory this works from any
    state the strategy can be applied to; it raises a HarnessError when it
    cannot (a checkers board with no optimal move, a Hanoi state off the
    optimal path, a malformed state).'''
    if kind == CHECKERS:
        step = checkers.oracle_step(state)
        return Step(step.move, step.state, index + 1)
    else:
        return hanoi.oracle_next(state, index, n)


def acceptable_moves(kind, state, index, n):
    '''Moves the strategy accepts at this point: every optimal checkers move,
    or the unique parity move for Hanoi.'''
    try:
        if kind == CHECKERS:
            return checkers.optimal_moves(state)
        return [hanoi.oracle_move(state, index, n)]
    except (HarnessError, IndexError, TypeError):
        return []


__all__ = [
    'CHECKERS', 'HANOI', 'KINDS', 'Step', 'InvalidMove', 'MalformedState',
    'initial_state', 'goal_state', 'optimal_length', 'is_goal',
    'apply_move', 'valid_moves', 'oracle_trajectory', 'policy_step',
]
