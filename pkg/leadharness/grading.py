'''Grading committed steps by replay.

Each committed step is checked against the state it was prompted with,
which is the previous step's claimed state (the initial state for the first
step).  A step whose move is invalid or breaks the optimal strategy is a
move finding error; a step with an acceptable move but a wrong claimed state
is a move execution error.
'''

import logging

from . import checkers, puzzle, verdicts
from .errors import HarnessError
from .step import CHECKERS


log = logging.getLogger(__name__)

_GRADING_ERRORS = (HarnessError, IndexError, TypeError, ValueError)


def classify_step(kind, n, pre_state, index, step):
    '''The verdict for committing step from pre_state as the move at 0-based
    position index.  step None stands for an unreadable reply.'''
    if step is None:
        return verdicts.PARSE
    try:
        true_state = puzzle.apply_move(kind, pre_state, step.move)
    except _GRADING_ERRORS:
        return verdicts.MOVE_FINDING

    if kind == CHECKERS:
        try:
            losing = checkers.is_losing(true_state) is not None
        except _GRADING_ERRORS:
            # Not a board the patterns can be judged on
            losing = False
        if losing:
            return verdicts.MOVE_FINDING
    elif step.move not in puzzle.acceptable_moves(kind, pre_state, index, n):
        return verdicts.MOVE_FINDING

    if tuple(step.state) != true_state:
        return verdicts.MOVE_EXECUTION
    return verdicts.OK


def classify_steps(kind, n, steps):
    '''Verdicts for a committed sequence, each step graded against the
    claimed state before it.'''
    state = puzzle.initial_state(kind, n)
    result = []
    for index, step in enumerate(steps):
        result.append(classify_step(kind, n, state, index, step))
        state = step.state
    return result


def grade_episode(record):
    '''Fills in outcome, first_error_index and error_types of record and
    marks its commit entries with their verdicts.  Returns record.'''
    kind, n = record.kind, record.n
    verdict_list = classify_steps(kind, n, record.steps)
    error_types = {
        index: verdict for index, verdict in enumerate(verdict_list)
        if verdict != verdicts.OK}
    if record.halt_index is not None and \
            record.halt_reason == verdicts.MALFORMED_REPLY:
        error_types[record.halt_index] = verdicts.PARSE

    budget = record.step_budget or puzzle.optimal_length(kind, n) + 2
    within_budget = not record.budget_exceeded and len(record.steps) <= budget
    goal_reached = bool(record.steps) and \
        tuple(record.steps[-1].state) == puzzle.goal_state(kind, n)

    record.error_types = error_types
    if not error_types and goal_reached and within_budget:
        record.outcome = verdicts.SUCCESS
        record.first_error_index = None
        record.failure_reason = None
    else:
        record.outcome = verdicts.FAILURE
        if error_types:
            record.first_error_index = min(error_types)
            reason = verdicts.INVALID_STEP
        elif not within_budget:
            record.first_error_index = budget
            reason = verdicts.BUDGET_EXCEEDED
        else:
            # Every committed step is fine but the solution stops short
            record.first_error_index = len(record.steps)
            reason = verdicts.GOAL_NOT_REACHED
        record.failure_reason = record.halt_reason or reason

    for verdict, entry in zip(verdict_list, record.commit_entries()):
        entry.classification = verdict

    log.debug(
        'Graded %s episode %d: %s, first error %s',
        record.strategy, record.episode, record.outcome,
        record.first_error_index)
    return record
