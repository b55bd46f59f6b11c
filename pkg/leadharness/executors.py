'''Execution strategies.

Every strategy drives one episode over an agent and returns a graded
`EpisodeRecord`:

- `run_single_shot`: one call for the whole solution, optionally after a
  warm-up instance (curriculum).
- `run_iterative_restart`: repeated calls, each continuing from the last
  claimed state.
- `run_atomic`: one depth-1 call per step.
- `run_atomic_voted`: per step, first-to-ahead-by-t voting over depth-1
  samples.
- `run_lookahead`: one depth-k rollout per step, only its first step is
  committed.
- `run_lead`: v depth-1 samples per step; unless they all agree the step is
  voted on by depth-k rollouts anchored at the last h committed states.

Committed steps are never revised.  In propagate mode a wrong claimed state
becomes the next prompt state and grading happens at the end; in
strict_halt mode the first wrong step ends the episode.
'''

import collections
import logging
from typing import Annotated, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import grading, prompts, puzzle, verdicts
from .agents import RolloutRequest
from .errors import ConfigError, Exhausted
from .records import EpisodeRecord, TranscriptEntry
from .step import Step
from .voting import VoteTally, vote_first_to_ahead


log = logging.getLogger(__name__)

SINGLE_SHOT = 'single_shot'
CURRICULUM = 'curriculum'
ITERATIVE_RESTART = 'iterative_restart'
ATOMIC = 'atomic'
ATOMIC_VOTED = 'atomic_voted'
LOOKAHEAD = 'lookahead'
LEAD = 'lead'
STRATEGIES = (
    SINGLE_SHOT, CURRICULUM, ITERATIVE_RESTART, ATOMIC, ATOMIC_VOTED,
    LOOKAHEAD, LEAD)

PROPAGATE = 'propagate'
STRICT_HALT = 'strict_halt'

PositiveInt = Annotated[int, Field(ge=1)]


class StrategyConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    strategy: Literal[
        'single_shot', 'curriculum', 'iterative_restart', 'atomic',
        'atomic_voted', 'lookahead', 'lead']
    # Base votes, lookahead depth, history window and vote margin
    v: PositiveInt = 8
    k: PositiveInt = 8
    h: PositiveInt = 3
    t: PositiveInt = 3
    vote_batch: PositiveInt = 1
    max_vote_rounds: PositiveInt = 16
    max_restarts: PositiveInt = 10
    # Extra attempts after an unreadable reply before the step fails
    max_resamples: Annotated[int, Field(ge=0)] = 3
    step_budget: Optional[PositiveInt] = None
    commit_mode: Literal['propagate', 'strict_halt'] = PROPAGATE
    # Count the v base predictions as votes in the lookahead tally
    seed_base_votes: bool = False

    @model_validator(mode='after')
    def _check_window(self):
        if self.h > self.k:
            raise ValueError(
                'history window h=%d exceeds lookahead depth k=%d' % (
                    self.h, self.k))
        return self

    def budget(self, kind, n):
        '''Most steps an episode may commit: the configured budget, by
        default the optimal length plus 2.'''
        optimal = puzzle.optimal_length(kind, n)
        if self.step_budget is None:
            return optimal + 2
        if self.step_budget < optimal:
            raise ConfigError([(
                'strategy.step_budget',
                'budget %d is below the optimal length %d for %s n=%d' % (
                    self.step_budget, optimal, kind, n))])
        return self.step_budget


class CommitBuffer:
    '''The last h committed pre-step states.  Before step i is decided it
    holds the states before steps i, i-1, ..., i-h+1 (fewer early on).'''

    def __init__(self, h, initial_state):
        assert h >= 1, 'History window must be at least 1'
        self.h = h
        self.__entries = collections.deque([(0, initial_state)], maxlen=h)

    def push(self, index, state):
        '''Records state as the state before step index.'''
        assert index == self.__entries[-1][0] + 1, \
            'Commit buffer must advance one step at a time'
        self.__entries.append((index, state))

    def window(self):
        '''(anchor_index, state) pairs, newest first: entry j is the state
        before step i-j.'''
        return list(reversed(self.__entries))

    def __len__(self):
        return len(self.__entries)


def extract_candidate(rollout_steps, anchor_index, target_index, k=None):
    '''The rollout's prediction for target_index, or None if the rollout
    stops short of it.'''
    offset = target_index - anchor_index
    assert offset >= 0, 'Rollout anchored after the target step'
    assert k is None or offset < k, 'Target step beyond the rollout depth'
    if offset < len(rollout_steps):
        return rollout_steps[offset]
    return None


def _first_step(response):
    return response.steps[0] if response.steps else None


def _rollout_variant(k):
    # A depth-1 rollout is exactly an atomic request
    return prompts.ATOMIC if k == 1 else prompts.LOOKAHEAD


class _Episode:
    '''State of one running episode and the bookkeeping shared by all
    strategies: sample numbering, exchange and commit records, halting.'''

    def __init__(
            self, agent, kind, n, cfg, episode, record_exchanges,
            full_prompts):
        self.agent = agent
        self.kind = kind
        self.n = n
        self.cfg = cfg
        self.record_exchanges = record_exchanges
        self.full_prompts = full_prompts
        self.budget = cfg.budget(kind, n)
        self.record = EpisodeRecord(
            strategy=cfg.strategy, kind=kind, n=n, episode=episode,
            config=cfg.model_dump(mode='json'), step_budget=self.budget)
        self.state = puzzle.initial_state(kind, n)
        self.goal = puzzle.goal_state(kind, n)
        self.__samples = 0

    @property
    def index(self):
        return len(self.record.steps)

    @property
    def halted(self):
        return self.record.halt_index is not None

    def at_goal(self):
        return tuple(self.state) == self.goal

    def request(self, anchor_index, anchor_state, depth, variant):
        sample_id = self.__samples
        self.__samples += 1
        return RolloutRequest(
            self.kind, self.n, anchor_state, anchor_index, depth, variant,
            sample_id)

    def exchange(self, requests, phase, step_index):
        '''Sends requests to the agent, in one batch if there are several,
        and records the exchanges.  Returns (responses, entries).'''
        if len(requests) == 1:
            responses = [self.agent(requests[0])]
        else:
            responses = self.agent.batch(requests)
        entries = []
        for request, response in zip(requests, responses):
            self.record.usage = self.record.usage + response.usage
            if not self.record_exchanges:
                continue
            entry = TranscriptEntry(
                episode=self.record.episode,
                step_index=step_index,
                phase=phase,
                anchor_index=request.anchor_index,
                prompt=prompts.prompt_record(
                    request.variant, self.kind, self.n,
                    request.anchor_state, request.prompt_extra(),
                    self.full_prompts),
                raw_text=response.raw_text,
                steps=list(response.steps),
                classification=response.parse_status,
                latency=response.latency,
                usage=response.usage,
                detail={
                    'sample_id': request.sample_id, 'depth': request.depth})
            self.record.entries.append(entry)
            entries.append(entry)
        return responses, entries

    def sample(self, count, depth, variant, phase):
        '''count independent rollouts from the current state.'''
        requests = [
            self.request(self.index, self.state, depth, variant)
            for _ in range(count)]
        responses, _ = self.exchange(requests, phase, self.index)
        return responses

    def sample_until_readable(self, depth, variant, phase):
        '''One rollout, resampled while the reply has no step.  Halts the
        episode and returns None once the resample budget is spent.'''
        for _ in range(self.cfg.max_resamples + 1):
            [response] = self.sample(1, depth, variant, phase)
            if response.steps:
                return response
        self.halt(verdicts.MALFORMED_REPLY)
        return None

    def commit(self, step, decision=None):
        '''Commits step as the next step.  Returns False if strict_halt
        mode stopped the episode on it.'''
        index = self.index
        step = Step(step.move, step.state, index + 1)
        pre_state = self.state
        decision = decision or {}
        self.record.steps.append(step)
        self.record.decisions.append(decision)
        self.record.entries.append(TranscriptEntry(
            episode=self.record.episode, step_index=index,
            phase=verdicts.COMMIT, steps=[step], detail=decision))
        self.state = step.state
        log.debug(
            '%s episode %d step %d: %s', self.cfg.strategy,
            self.record.episode, index, step.key())

        if self.cfg.commit_mode == STRICT_HALT:
            verdict = grading.classify_step(
                self.kind, self.n, pre_state, index, step)
            if verdict != verdicts.OK:
                self.halt(verdicts.INVALID_STEP, index + 1)
                return False
        return True

    def halt(self, reason, index=None):
        self.record.halt_index = self.index if index is None else index
        self.record.halt_reason = reason

    def over_budget(self):
        if self.index >= self.budget:
            self.record.budget_exceeded = True
            self.halt(verdicts.BUDGET_EXCEEDED)
            return True
        return False

    def finish(self):
        record = grading.grade_episode(self.record)
        log.info(
            '%s %s n=%d episode %d: %s after %d steps, first error %s, '
            '%d calls', record.strategy, record.kind, record.n,
            record.episode, record.outcome, len(record.steps),
            record.first_error_index, record.calls)
        return record


def _stepwise(episode, choose):
    '''Commits one chosen step at a time until the claimed state is the
    goal, the budget is spent or the episode halts.'''
    while not episode.at_goal() and not episode.over_budget():
        chosen = choose(episode)
        if chosen is None:
            break
        step, decision = chosen
        if not episode.commit(step, decision):
            break
    return episode.finish()


def _start(agent, kind, n, cfg, strategy, episode, options):
    if cfg is None:
        cfg = StrategyConfig(strategy=strategy)
    return _Episode(
        agent, kind, n, cfg, episode,
        options.get('record_exchanges', True),
        options.get('full_prompts', False))


def _target_portion(kind, n, steps):
    '''Drops the warm-up solution from the front of a curriculum reply.
    Warm-up steps are the leading run of steps with the warm-up board size,
    at most one warm-up solution long, or the first warm-up solution's worth
    of steps when the target has the warm-up size too.  Everything after
    the warm-up is graded, including target steps that lost or gained a
    piece.  Replies listing only the target pass through unchanged.'''
    warmup_length = puzzle.optimal_length(kind, prompts.WARMUP_N)
    if n == prompts.WARMUP_N:
        # Only a listing longer than one solution can hold the warm-up
        if len(steps) > puzzle.optimal_length(kind, n):
            return steps[warmup_length:]
        return steps
    warmup_size = _pieces(kind, puzzle.initial_state(kind, prompts.WARMUP_N))
    leading = 0
    for step in steps[:warmup_length]:
        if _pieces(kind, step.state) != warmup_size:
            break
        leading += 1
    return steps[leading:]


def _pieces(kind, state):
    if kind == puzzle.CHECKERS:
        return len(state)
    return sum(len(peg) for peg in state)


def run_single_shot(
        agent, kind, n, curriculum=False, cfg=None, episode=0, **options):
    '''One call for the complete solution.  With curriculum the prompt
    first asks for the n=2 warm-up and only the target part is graded.'''
    strategy = CURRICULUM if curriculum else SINGLE_SHOT
    run = _start(agent, kind, n, cfg, strategy, episode, options)
    variant = prompts.CURRICULUM if curriculum else prompts.SINGLE_SHOT
    [response] = run.sample(1, 1, variant, verdicts.SINGLE_SHOT)
    run.record.rounds = 1

    steps = list(response.steps)
    if curriculum:
        steps = _target_portion(kind, n, steps)
    if not steps:
        run.halt(verdicts.MALFORMED_REPLY)
    for step in steps:
        if run.over_budget() or not run.commit(step, {'round': 0}):
            break
    return run.finish()


def run_iterative_restart(agent, kind, n, cfg=None, episode=0, **options):
    '''Asks again and again for the rest of the solution, each time from the
    last claimed state, until the goal is claimed, the budget or restart
    limit is reached or two rounds in a row make no progress.'''
    run = _start(agent, kind, n, cfg, ITERATIVE_RESTART, episode, options)
    idle_rounds = 0
    for round_number in range(run.cfg.max_restarts):
        if run.at_goal() or run.halted:
            break
        run.record.rounds = round_number + 1
        [response] = run.sample(
            1, 1, prompts.ITERATIVE, verdicts.RESTART_ROUND)
        if not response.steps:
            idle_rounds += 1
            if idle_rounds >= 2:
                run.halt(verdicts.NO_PROGRESS)
            continue
        idle_rounds = 0
        for step in response.steps:
            if run.over_budget() or not run.commit(
                    step, {'round': round_number}):
                break
            if run.at_goal():
                break
    return run.finish()


def run_atomic(agent, kind, n, cfg=None, episode=0, **options):
    '''One depth-1 call per step, conditioned only on the current state.'''
    run = _start(agent, kind, n, cfg, ATOMIC, episode, options)

    def choose(run):
        response = run.sample_until_readable(
            1, prompts.ATOMIC, verdicts.BASE_VOTE)
        if response is None:
            return None
        return response.steps[0], {}
    return _stepwise(run, choose)


def _vote(run, sampler, tally=None):
    '''Runs the first-to-ahead vote, halting the episode if every sample
    was unreadable.'''
    cfg = run.cfg
    try:
        return vote_first_to_ahead(
            sampler, cfg.t, cfg.vote_batch, cfg.max_vote_rounds,
            key=Step.key, tally=tally)
    except Exhausted:
        run.halt(verdicts.EXHAUSTED)
        return None, None


def run_atomic_voted(agent, kind, n, cfg=None, episode=0, **options):
    '''Atomic execution with first-to-ahead-by-t voting over depth-1
    samples at every step.  A deterministic agent is sampled once.'''
    run = _start(agent, kind, n, cfg, ATOMIC_VOTED, episode, options)

    def sampler(batch):
        responses = run.sample(batch, 1, prompts.ATOMIC, verdicts.BASE_VOTE)
        return [_first_step(response) for response in responses]

    def choose(run):
        if agent.deterministic:
            response = run.sample_until_readable(
                1, prompts.ATOMIC, verdicts.BASE_VOTE)
            if response is None:
                return None
            return response.steps[0], {'votes': 1}
        winner, tally = _vote(run, sampler)
        if winner is None:
            return None
        return winner, {'tally': tally.to_json()}
    return _stepwise(run, choose)


def run_lookahead(agent, kind, n, cfg=None, episode=0, **options):
    '''One depth-k rollout per step; only its first step is committed and
    the rest stays in the transcript.'''
    run = _start(agent, kind, n, cfg, LOOKAHEAD, episode, options)
    variant = _rollout_variant(run.cfg.k)

    def choose(run):
        response = run.sample_until_readable(
            run.cfg.k, variant, verdicts.LOOKAHEAD_VOTE)
        if response is None:
            return None
        return response.steps[0], {}
    return _stepwise(run, choose)


def _prefix_consistent(committed, rollout_steps, anchor_index, target_index):
    '''Whether the rollout's steps before target_index match what was
    actually committed.'''
    offset = target_index - anchor_index
    if len(rollout_steps) <= offset:
        return False
    return all(
        predicted.key() == actual.key() for predicted, actual in zip(
            rollout_steps[:offset], committed[anchor_index:target_index]))


def run_lead(agent, kind, n, cfg=None, episode=0, **options):
    '''Per step: v depth-1 predictions, committed at once if they all agree.
    Otherwise each voting round launches one depth-k rollout from each of
    the last h committed states (fewer at the start), and the rollouts'
    predictions for the current step are voted on first-to-ahead-by-t.'''
    run = _start(agent, kind, n, cfg, LEAD, episode, options)
    cfg = run.cfg
    buffer = CommitBuffer(cfg.h, run.state)
    variant = _rollout_variant(cfg.k)

    def choose(run):
        index = run.index
        base = [
            _first_step(response) for response in
            run.sample(cfg.v, 1, prompts.ATOMIC, verdicts.BASE_VOTE)]
        keys = set(step.key() for step in base if step is not None)
        if None not in base and len(keys) == 1:
            return base[0], {'unanimous': True, 'base_votes': cfg.v}

        tally = VoteTally()
        if cfg.seed_base_votes:
            for step in base:
                tally.add(None if step is None else step.key(), step)
        window = buffer.window()
        consistent = []

        def sampler(batch):
            candidates = []
            for _ in range(batch):
                requests = [
                    run.request(anchor_index, anchor_state, cfg.k, variant)
                    for anchor_index, anchor_state in window]
                responses, entries = run.exchange(
                    requests, verdicts.LOOKAHEAD_VOTE, index)
                for request, response in zip(requests, responses):
                    candidates.append(extract_candidate(
                        response.steps, request.anchor_index, index, cfg.k))
                    consistent.append(_prefix_consistent(
                        run.record.steps, response.steps,
                        request.anchor_index, index))
                for entry, flag in zip(entries, consistent[-len(requests):]):
                    entry.detail['prefix_consistent'] = flag
            return candidates

        winner, tally = _vote(run, sampler, tally)
        if winner is None:
            return None
        return winner, {
            'unanimous': False, 'base_votes': cfg.v,
            'seed_base_votes': cfg.seed_base_votes,
            'window': len(window), 'tally': tally.to_json(),
            'prefix_consistent': consistent}

    def choose_and_buffer(run):
        chosen = choose(run)
        if chosen is not None:
            step = chosen[0]
            buffer.push(run.index + 1, step.state)
        return chosen
    return _stepwise(run, choose_and_buffer)


_RUNNERS = {
    ITERATIVE_RESTART: run_iterative_restart,
    ATOMIC: run_atomic,
    ATOMIC_VOTED: run_atomic_voted,
    LOOKAHEAD: run_lookahead,
    LEAD: run_lead,
}


def run_episode(agent, kind, n, cfg, episode=0, **options):
    '''Runs one episode of the strategy cfg names.'''
    if cfg.strategy in (SINGLE_SHOT, CURRICULUM):
        return run_single_shot(
            agent, kind, n, cfg.strategy == CURRICULUM, cfg, episode,
            **options)
    return _RUNNERS[cfg.strategy](agent, kind, n, cfg, episode, **options)


__all__ = [
    'StrategyConfig', 'CommitBuffer', 'EpisodeRecord', 'extract_candidate',
    'run_single_shot', 'run_iterative_restart', 'run_atomic',
    'run_atomic_voted', 'run_lookahead', 'run_lead', 'run_episode',
    'STRATEGIES',
]
