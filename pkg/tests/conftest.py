import collections
import itertools
import math

import pytest

from leadharness import checkers, hanoi, listing, puzzle
from leadharness.agents import (
    Agent, MockErrorProfile, RolloutResponse, Usage, format_reply)
from leadharness.step import CHECKERS, HANOI, Step


# The step every criterion-style mock profile makes hard: step 20 of the
# checkers n=8 oracle trajectory (80 steps), wrong 60% of the time and
# always in the same way.
HARD_STEP = 20
HARD_N = 8

# Binomial bounds in the statistical tests are at least this many sigma
SIGMAS = 4


def binomial_tolerance(p, samples, sigmas=SIGMAS):
    return sigmas * math.sqrt(p * (1 - p) / samples)


def hard_step_profile(**changes):
    fields = dict(
        per_step_error={HARD_STEP: 0.6}, consistency=1.0,
        cond_error=0.02, seed=1)
    fields.update(changes)
    return MockErrorProfile(**fields)


def bfs_distances(kind, n, goal=None):
    '''Distance to goal of every state that can reach it, found by a
    breadth first search backwards over the full move graph.'''
    start = puzzle.initial_state(kind, n)
    # Forward graph first: every state reachable from the initial state
    edges = collections.defaultdict(list)
    seen = {start}
    frontier = [start]
    while frontier:
        following = []
        for state in frontier:
            for move in puzzle.valid_moves(kind, state):
                successor = puzzle.apply_move(kind, state, move)
                edges[successor].append(state)
                if successor not in seen:
                    seen.add(successor)
                    following.append(successor)
        frontier = following
    goal = goal or puzzle.goal_state(kind, n)
    distances = {goal: 0}
    frontier = [goal]
    while frontier:
        following = []
        for state in frontier:
            for previous in edges[state]:
                if previous not in distances:
                    distances[previous] = distances[state] + 1
                    following.append(previous)
        frontier = following
    return seen, distances


class ScriptedAgent(Agent):
    '''Answers each request with the next item of a script.  An item is a
    list of steps, None for an unreadable reply, or a callable taking the
    request.  requests records what was asked.'''

    def __init__(self, script, deterministic=False):
        self.script = iter(script)
        self.deterministic = deterministic
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        item = next(self.script)
        if callable(item):
            item = item(request)
        if item is None:
            return RolloutResponse((), 'I cannot', listing.MALFORMED,
                                   Usage(calls=1))
        return RolloutResponse(
            tuple(item), format_reply(item, request.variant), listing.OK,
            Usage(calls=1))


def oracle_steps(kind, n, start, count):
    '''count oracle steps from 0-based position start.'''
    return list(puzzle.oracle_trajectory(kind, n)[start:start + count])


def wrong_state_step(kind, n, index):
    '''The oracle move at index with a claimed state missing a piece.'''
    step = puzzle.oracle_trajectory(kind, n)[index]
    if kind == CHECKERS:
        state = step.state[1:]
    else:
        state = tuple(peg[:-1] if peg else peg for peg in step.state)
    return Step(step.move, state, step.step_id)


def every_board(n):
    '''Every arrangement of n red, n blue and one empty cell.'''
    length = 2 * n + 1
    for empty in range(length):
        others = [i for i in range(length) if i != empty]
        for reds in itertools.combinations(others, n):
            board = [checkers.BLUE] * length
            board[empty] = checkers.EMPTY
            for i in reds:
                board[i] = checkers.RED
            yield tuple(board)


@pytest.fixture
def hard_profile():
    return hard_step_profile()


def hanoi_states(n):
    '''Every legal arrangement of n disks on three pegs.'''
    for pegs in itertools.product(range(hanoi.PEGS), repeat=n):
        state = [[], [], []]
        for disk in range(n, 0, -1):
            state[pegs[disk - 1]].append(disk)
        yield tuple(tuple(peg) for peg in state)


KIND_IDS = [CHECKERS, HANOI]
