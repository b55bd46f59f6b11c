'''Step agents.

An agent is a callable taking a `RolloutRequest` and returning a
`RolloutResponse`.  Agents also offer `Agent.batch` so that a voting round
can be handed over in one go, and a ``deterministic`` flag telling voted
strategies that a single sample is as good as many.

Two agents live here: `OracleAgent`, which replays the oracle solution, and
`MockAgent`, a seeded stochastic agent with a configurable error profile.
The remote model agent is in `leadharness.endpoint`.
'''

from dataclasses import dataclass, field
from typing import Annotated, Dict, Literal, Tuple

import numpy
from pydantic import BaseModel, ConfigDict, Field

from . import checkers, listing, prompts, puzzle
from .errors import HarnessError, OffTrajectory
from .step import CHECKERS, Step, format_listing


OMIT_PIECE = 'omit_piece'
EXTRA_PIECE = 'extra_piece'
WRONG_MOVE = 'wrong_move'
RANDOM_VALID = 'random_valid'
ERROR_KINDS = (OMIT_PIECE, EXTRA_PIECE, WRONG_MOVE, RANDOM_VALID)

Probability = Annotated[float, Field(ge=0, le=1)]


@dataclass(frozen=True)
class Usage:
    calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __add__(self, other):
        return Usage(
            self.calls + other.calls,
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens)

    def to_json(self):
        return {
            'calls': self.calls,
            'prompt_tokens': self.prompt_tokens,
            'completion_tokens': self.completion_tokens,
        }


@dataclass(frozen=True)
class RolloutRequest:
    '''Asks for the next ``depth`` steps from anchor_state, which is the
    state before the step at 0-based position anchor_index.  The anchor is
    whatever the executor committed, so in propagate mode it may be a
    malformed claimed state.  sample_id distinguishes repeated samples of
    the same request within an episode.'''
    kind: str
    n: int
    anchor_state: tuple
    anchor_index: int
    depth: int = 1
    variant: str = prompts.ATOMIC
    sample_id: int = 0

    def __post_init__(self):
        assert self.depth >= 1, 'Rollout depth must be at least 1'
        assert self.anchor_index >= 0, 'Negative anchor index'
        prompts.template_name(self.variant, self.kind)

    @property
    def expectation(self):
        '''Number of steps the reply must hold, None for open ended
        variants.'''
        if self.variant in prompts.OPEN_ENDED:
            return None
        return self.depth

    def prompt_extra(self):
        return {'step_id': self.anchor_index, 'depth': self.depth}


@dataclass(frozen=True)
class RolloutResponse:
    steps: Tuple[Step, ...]
    raw_text: str
    parse_status: str
    usage: Usage = field(default_factory=Usage)
    latency: float = 0.0


class MockErrorProfile(BaseModel):
    '''Error behaviour of `MockAgent`.  per_step_error is keyed by the
    0-based position of the step on the oracle trajectory.'''
    model_config = ConfigDict(extra='forbid', frozen=True)

    per_step_error: Dict[int, Probability] = {}
    default_error: Probability = 0.0
    error_kind: Literal[
        'omit_piece', 'extra_piece', 'wrong_move', 'random_valid'] = \
        OMIT_PIECE
    consistency: Probability = 0.0
    cond_error: Probability = 0.0
    seed: Annotated[int, Field(ge=0)] = 0

    def first_step_error(self, index):
        return self.per_step_error.get(index, self.default_error)

    @property
    def error_free(self):
        return not any(self.per_step_error.values()) \
            and self.default_error == 0 and self.cond_error == 0


def format_reply(steps, variant=prompts.ATOMIC, warmup=()):
    '''Reply text in the listing grammar the prompts ask for.'''
    steps = list(steps)
    if variant == prompts.ATOMIC and len(steps) == 1:
        step = steps[0]
        return 'solution = ' + step.key().replace("'state'", "'new_state'")
    name = 'moves' if variant == prompts.ITERATIVE else 'solution'
    text = format_listing(steps, with_step_id=True, name=name)
    if variant == prompts.CURRICULUM:
        text = format_listing(warmup, name='warmup') + '\n\n' + text
    return text


class Agent:
    deterministic = False

    def __call__(self, request):
        raise NotImplementedError

    def batch(self, requests):
        return [self(request) for request in requests]


class OracleAgent(Agent):
    '''Replays the oracle solution.  Requests must be anchored on the oracle
    trajectory.  max_steps_per_reply bounds open ended replies, so iterative
    restart can be driven in chunks.'''
    deterministic = True

    def __init__(self, max_steps_per_reply=None):
        assert max_steps_per_reply is None or max_steps_per_reply >= 1, \
            'max_steps_per_reply must be positive'
        self.max_steps_per_reply = max_steps_per_reply

    def __call__(self, request):
        states, index = puzzle.trajectory_states(request.kind, request.n)
        try:
            position = index[request.anchor_state]
        except (KeyError, TypeError):
            raise OffTrajectory(
                'State %r is not on the oracle solution for n=%d' % (
                    request.anchor_state, request.n))
        trajectory = puzzle.oracle_trajectory(request.kind, request.n)
        if request.variant in prompts.OPEN_ENDED:
            count = len(trajectory) - position
        else:
            count = request.depth
        if self.max_steps_per_reply is not None:
            count = min(count, self.max_steps_per_reply)
        steps = trajectory[position:position + count]

        warmup = ()
        if request.variant == prompts.CURRICULUM:
            warmup = puzzle.oracle_trajectory(request.kind, prompts.WARMUP_N)
        return RolloutResponse(
            tuple(warmup) + tuple(steps),
            format_reply(steps, request.variant, warmup),
            listing.OK, Usage(calls=1))


def _state_key(state):
    return repr(state)


class MockAgent(Agent):
    '''Seeded stochastic agent following the oracle strategy from whatever
    state it is given, with errors drawn from a `MockErrorProfile`.

    The first step of a rollout errs with the profile probability for its
    trajectory position.  Later steps err with cond_error while the rollout
    is still on track, and with default_error once it has gone wrong (the
    rollout then carries on from its own claimed state).  Open ended replies
    (iterative, single shot, curriculum) keep the listed per-step
    probabilities at every position.  A repeated error at the same (step,
    error kind, state) reuses the first wrong answer with probability
    consistency.

    Every request gets its own random stream derived from the profile seed,
    the run seed, the episode, the anchor index, the sample id and the
    variant, so answers depend only on those and on the error cache.  Use
    one instance per episode.'''

    def __init__(self, profile=None, episode=0, seed=0):
        self.profile = profile or MockErrorProfile()
        self.episode = episode
        self.seed = seed
        self.deterministic = self.profile.error_free
        self.__errors = {}

    def _rng(self, request):
        return numpy.random.default_rng([
            self.profile.seed, self.seed, self.episode, request.anchor_index,
            request.sample_id, prompts.VARIANTS.index(request.variant)])

    def __call__(self, request):
        kind, n = request.kind, request.n
        reached_goal = puzzle.module(kind).is_goal
        rng = None
        state = request.anchor_state
        steps = []
        on_track = True
        depth = request.depth
        open_ended = request.variant in prompts.OPEN_ENDED
        if open_ended:
            depth = puzzle.optimal_length(kind, n) - request.anchor_index
        for offset in range(max(depth, 0)):
            if reached_goal(state):
                break
            index = request.anchor_index + offset
            true_step = self.true_step(kind, state, index, n)
            if true_step is None:
                break

            if offset == 0 or (open_ended and on_track
                                and index in self.profile.per_step_error):
                p = self.profile.first_step_error(index)
            elif on_track:
                p = self.profile.cond_error
            else:
                p = self.profile.default_error
            step = true_step
            if p > 0:
                if rng is None:
                    rng = self._rng(request)
                if rng.random() < p:
                    step = self._error(kind, state, index, true_step, rng)
            on_track = step.key() == true_step.key()
            steps.append(Step(step.move, step.state, index + 1))
            state = step.state

        if len(steps) == depth or reached_goal(state):
            status = listing.OK
        else:
            status = listing.TRUNCATED
        warmup = ()
        if request.variant == prompts.CURRICULUM:
            warmup = puzzle.oracle_trajectory(kind, prompts.WARMUP_N)
        return RolloutResponse(
            tuple(warmup) + tuple(steps),
            format_reply(steps, request.variant, warmup),
            status, Usage(calls=1))

    @staticmethod
    def true_step(kind, state, index, n):
        '''The step the oracle strategy takes from state, falling back to the
        first valid move off the strategy's domain, or None if there is no
        move at all.'''
        try:
            return puzzle.policy_step(kind, state, index, n)
        except (HarnessError, IndexError, TypeError, ValueError):
            pass
        try:
            move = puzzle.valid_moves(kind, state)[0]
            return Step(move, puzzle.apply_move(kind, state, move), index + 1)
        except (HarnessError, IndexError, TypeError, ValueError):
            return None

    def _error(self, kind, state, index, true_step, rng):
        error_kind = self.profile.error_kind
        key = (index, error_kind, _state_key(state))
        cached = self.__errors.get(key)
        if cached is not None and (
                self.profile.consistency >= 1 or
                rng.random() < self.profile.consistency):
            return cached
        wrong = _corrupt(kind, state, true_step, error_kind, rng)
        self.__errors.setdefault(key, wrong)
        return wrong


def _runs(cells):
    '''(start, length) of every maximal run of equal pieces.'''
    runs = []
    start = 0
    for i in range(1, len(cells) + 1):
        if i == len(cells) or cells[i] != cells[start]:
            runs.append((start, i - start))
            start = i
    return runs


def _longest_run(board, rng):
    runs = [run for run in _runs(board) if board[run[0]] != checkers.EMPTY]
    longest = max(length for _, length in runs)
    candidates = [run for run in runs if run[1] == longest]
    return candidates[rng.integers(len(candidates))]


def _tallest_peg(state, rng):
    tallest = max(len(peg) for peg in state)
    candidates = [i for i, peg in enumerate(state) if len(peg) == tallest]
    return candidates[rng.integers(len(candidates))]


def _has_pieces(kind, state):
    if kind == CHECKERS:
        return any(cell != checkers.EMPTY for cell in state)
    return any(state)


def _omit_piece(kind, state, rng):
    if not _has_pieces(kind, state):
        return state
    if kind == CHECKERS:
        start, length = _longest_run(state, rng)
        return state[:start] + state[start + 1:]
    peg = _tallest_peg(state, rng)
    disks = state[peg]
    drop = rng.integers(len(disks))
    pegs = list(state)
    pegs[peg] = disks[:drop] + disks[drop + 1:]
    return tuple(pegs)


def _extra_piece(kind, state, rng):
    if not _has_pieces(kind, state):
        return state
    if kind == CHECKERS:
        start, length = _longest_run(state, rng)
        return state[:start] + state[start:start + 1] + state[start:]
    peg = _tallest_peg(state, rng)
    disks = state[peg]
    copy = rng.integers(len(disks))
    pegs = list(state)
    pegs[peg] = disks[:copy + 1] + disks[copy:]
    return tuple(pegs)


def _corrupt(kind, state, true_step, error_kind, rng):
    '''A wrong step of the given kind taken from state.'''
    if error_kind in (WRONG_MOVE, RANDOM_VALID):
        try:
            moves = puzzle.valid_moves(kind, state)
        except HarnessError:
            moves = []
        if error_kind == WRONG_MOVE:
            moves = [move for move in moves if move != true_step.move]
        if moves:
            move = moves[rng.integers(len(moves))]
            return Step(move, puzzle.apply_move(kind, state, move))
        error_kind = EXTRA_PIECE

    if error_kind == OMIT_PIECE:
        return Step(true_step.move, _omit_piece(kind, true_step.state, rng))
    return Step(true_step.move, _extra_piece(kind, true_step.state, rng))


__all__ = [
    'Usage', 'RolloutRequest', 'RolloutResponse', 'MockErrorProfile',
    'Agent', 'OracleAgent', 'MockAgent', 'format_reply', 'ERROR_KINDS',
]
