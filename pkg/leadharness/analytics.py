'''Measurements over agents and episode records.

Profiling functions sample an agent along the oracle trajectory, so every
request is anchored on a correct state; episode records are only used by
the distribution functions.  Step indices are 0-based, rollout offsets are
1-based (offset 1 is the first predicted step).
'''

import collections
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy

from . import grading, prompts, puzzle, verdicts
from .agents import RolloutRequest
from .errors import NoErrors


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepErrorStats:
    step_index: int
    samples: int
    errors: int
    breakdown: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        assert 0 <= self.errors <= self.samples, 'More errors than samples'

    @property
    def error_rate(self):
        return self.errors / self.samples if self.samples else 0.0

    @property
    def accuracy(self):
        return 1.0 - self.error_rate

    def rate_of(self, error_type):
        return self.breakdown.get(error_type, 0) / self.samples


@dataclass(frozen=True)
class ErrorDistribution:
    weights: Dict[int, float]
    total_errors: int


@dataclass
class PositionalAccuracy:
    '''Rollout accuracy by offset.  accuracy[o] is the fraction of rollouts
    whose o-th step equals the oracle step at that absolute position;
    acceptable[o] also accepts any strategy-conforming, correctly executed
    move.  matrix[anchor][o] is the same accuracy for the rollouts
    anchored at step anchor only.'''
    k: int
    conditioned: bool
    accuracy: Dict[int, float] = field(default_factory=dict)
    acceptable: Dict[int, float] = field(default_factory=dict)
    counts: Dict[int, int] = field(default_factory=dict)
    matrix: Dict[int, Dict[int, float]] = field(default_factory=dict)

    def step_accuracy(self, step_index):
        '''Accuracy of the prediction for step_index by offset, that is from
        the rollouts anchored at step_index - offset + 1.'''
        result = {}
        for offset in range(1, self.k + 1):
            row = self.matrix.get(step_index - offset + 1)
            if row is not None and offset in row:
                result[offset] = row[offset]
        return result


def profile_step_errors(
        agent, kind, n, samples_per_step, variant=prompts.ATOMIC, depth=1):
    '''Samples every step of the oracle trajectory samples_per_step times,
    always from the correct state, and grades the first predicted step of
    each sample.  Unreadable replies count as parse errors.'''
    assert samples_per_step >= 1, 'Need at least one sample per step'
    states, _ = puzzle.trajectory_states(kind, n)
    stats = []
    for index in range(len(states) - 1):
        requests = [
            RolloutRequest(kind, n, states[index], index, depth, variant, s)
            for s in range(samples_per_step)]
        breakdown = collections.Counter()
        for response in agent.batch(requests):
            step = response.steps[0] if response.steps else None
            verdict = grading.classify_step(
                kind, n, states[index], index, step)
            if verdict != verdicts.OK:
                breakdown[verdict] += 1
        stats.append(StepErrorStats(
            index, samples_per_step, sum(breakdown.values()),
            {error: breakdown[error] for error in verdicts.ERROR_TYPES}))
    log.info(
        'Profiled %s n=%d: %d steps, %d errors', kind, n, len(stats),
        sum(s.errors for s in stats))
    return stats


def error_rate_histogram(stats, bins=10):
    '''Counts of steps by error rate bucket, as (low, high, steps) rows.
    Buckets split [0, 1] evenly; the last bucket includes 1.'''
    rates = [s.error_rate for s in stats]
    counts, edges = numpy.histogram(rates, bins=bins, range=(0.0, 1.0))
    return [
        (float(low), float(high), int(count))
        for low, high, count in zip(edges[:-1], edges[1:], counts)]


def _error_counts(source):
    if isinstance(source, dict):
        return source
    counts = collections.Counter()
    for item in source:
        if isinstance(item, StepErrorStats):
            if item.errors:
                counts[item.step_index] += item.errors
        elif getattr(item, 'first_error_index', None) is not None:
            counts[item.first_error_index] += 1
    return counts


def conditional_error_distribution(source):
    '''Where failures happen: error counts per step index normalised to
    sum to 1.  source is a {step: count} map, a sequence of StepErrorStats
    (all sampled errors count) or of episode records (each failed episode
    counts once, at its first error).'''
    if isinstance(source, ErrorDistribution):
        return source
    counts = {
        int(step): count for step, count in _error_counts(source).items()
        if count > 0}
    total = sum(counts.values())
    if total == 0:
        raise NoErrors('No errors to build a distribution from')
    return ErrorDistribution(
        {step: counts[step] / total for step in sorted(counts)}, total)


def tv_distance(p, q):
    '''Total variation distance between two error distributions, over the
    union of their supports.'''
    p = p.weights if isinstance(p, ErrorDistribution) else p
    q = q.weights if isinstance(q, ErrorDistribution) else q
    support = sorted(set(p) | set(q))
    if not support:
        return 0.0
    a = numpy.array([p.get(step, 0.0) for step in support])
    b = numpy.array([q.get(step, 0.0) for step in support])
    return float(min(1.0, 0.5 * numpy.abs(a - b).sum()))


def self_distance_baseline(records, splits=1, seed=0):
    '''TV distance between the failure distributions of two random halves
    of the failed runs, averaged over splits random partitions.'''
    failed = [r for r in records if r.first_error_index is not None]
    if len(failed) < 2:
        raise NoErrors('Need at least two runs with errors, not %d' % len(
            failed))
    rng = numpy.random.default_rng(seed)
    distances = []
    for _ in range(splits):
        order = rng.permutation(len(failed))
        half = len(failed) // 2
        first = [failed[i] for i in order[:half]]
        second = [failed[i] for i in order[half:]]
        distances.append(tv_distance(
            conditional_error_distribution(first),
            conditional_error_distribution(second)))
    return float(numpy.mean(distances))


class _PositionalCounts:
    '''Accumulates rollouts anchored on the oracle trajectory.'''

    def __init__(self, kind, n, k, conditioned):
        self.kind, self.n, self.k = kind, n, k
        self.states, _ = puzzle.trajectory_states(kind, n)
        self.truth = [
            step.key() for step in puzzle.oracle_trajectory(kind, n)]
        self.result = PositionalAccuracy(k, conditioned)
        self.totals = numpy.zeros(k + 1, dtype=int)
        self.correct = numpy.zeros(k + 1, dtype=int)
        self.acceptable = numpy.zeros(k + 1, dtype=int)
        self.rows = {}

    def add(self, anchor, steps):
        length = len(self.truth)
        if self.result.conditioned and not (
                steps and steps[0].key() == self.truth[anchor]):
            return
        row_totals, row_correct = self.rows.setdefault(anchor, (
            numpy.zeros(self.k + 1, dtype=int),
            numpy.zeros(self.k + 1, dtype=int)))
        for offset in range(1, min(self.k, length - anchor) + 1):
            index = anchor + offset - 1
            row_totals[offset] += 1
            if offset > len(steps):
                continue
            step = steps[offset - 1]
            if step.key() == self.truth[index]:
                row_correct[offset] += 1
            if grading.classify_step(
                    self.kind, self.n, self.states[index], index,
                    step) == verdicts.OK:
                self.acceptable[offset] += 1

    def finish(self):
        result = self.result
        for anchor in sorted(self.rows):
            row_totals, row_correct = self.rows[anchor]
            self.totals += row_totals
            self.correct += row_correct
            result.matrix[anchor] = {
                offset: float(row_correct[offset] / row_totals[offset])
                for offset in range(1, self.k + 1) if row_totals[offset]}
        for offset in range(1, self.k + 1):
            if self.totals[offset]:
                total = self.totals[offset]
                result.counts[offset] = int(total)
                result.accuracy[offset] = float(self.correct[offset] / total)
                result.acceptable[offset] = float(
                    self.acceptable[offset] / total)
        return result


def lookahead_positional_accuracy(
        agent, kind, n, k, samples, conditioned=False, anchors=None):
    '''Draws samples depth-k rollouts from each oracle trajectory anchor and
    scores every offset against the oracle step at that absolute position.
    With conditioned only rollouts whose first step is correct count.'''
    assert samples >= 1, 'Need at least one sample per anchor'
    counts = _PositionalCounts(kind, n, k, conditioned)
    variant = prompts.ATOMIC if k == 1 else prompts.LOOKAHEAD
    if anchors is None:
        anchors = range(len(counts.truth))
    for anchor in anchors:
        requests = [
            RolloutRequest(kind, n, counts.states[anchor], anchor, k,
                           variant, s)
            for s in range(samples)]
        for response in agent.batch(requests):
            counts.add(anchor, response.steps)
    return counts.finish()


def _anchored_exchanges(records, phase):
    '''(record, entry) for every exchange of phase whose anchor is the
    oracle state at its index, going by what the record committed.'''
    for record in records:
        states, _ = puzzle.trajectory_states(record.kind, record.n)
        for entry in record.entries:
            anchor = entry.anchor_index
            if entry.phase != phase or anchor is None \
                    or anchor > len(record.steps) \
                    or anchor >= len(states) - 1:
                continue
            if anchor == 0:
                anchor_state = puzzle.initial_state(record.kind, record.n)
            else:
                anchor_state = tuple(record.steps[anchor - 1].state)
            if anchor_state == states[anchor]:
                yield record, entry


def transcript_positional_accuracy(records, k=None, conditioned=False):
    '''Positional accuracy of the lookahead rollouts kept in the records'
    transcripts, counting only rollouts anchored on the oracle trajectory.
    Records must share puzzle and n; k defaults to their configured depth.'''
    records = list(records)
    assert records, 'No records'
    kind, n = records[0].kind, records[0].n
    assert all(r.kind == kind and r.n == n for r in records), \
        'Records mix puzzles or sizes'
    if k is None:
        k = records[0].config.get('k', 1)
    counts = _PositionalCounts(kind, n, k, conditioned)
    for _, entry in _anchored_exchanges(records, verdicts.LOOKAHEAD_VOTE):
        counts.add(entry.anchor_index, entry.steps)
    return counts.finish()


def transcript_step_errors(records, phase=verdicts.BASE_VOTE):
    '''Per-step error statistics from the depth-1 samples kept in the
    records' transcripts, counting only samples prompted with the oracle
    state.  Steps never sampled that way are left out.'''
    records = list(records)
    breakdowns = collections.defaultdict(collections.Counter)
    samples = collections.Counter()
    for record, entry in _anchored_exchanges(records, phase):
        index = entry.anchor_index
        states, _ = puzzle.trajectory_states(record.kind, record.n)
        step = entry.steps[0] if entry.steps else None
        samples[index] += 1
        verdict = grading.classify_step(
            record.kind, record.n, states[index], index, step)
        if verdict != verdicts.OK:
            breakdowns[index][verdict] += 1
    return [
        StepErrorStats(
            index, samples[index], sum(breakdowns[index].values()),
            {error: breakdowns[index][error]
                for error in verdicts.ERROR_TYPES})
        for index in sorted(samples)]


def rank_order_accuracies(stats, descending=False):
    '''Per-step accuracies (1 - error rate) sorted ascending, or descending
    if asked, as (rank, step_index, accuracy) with 1-based ranks.  Ties keep
    step order.'''
    if descending:
        order = sorted(stats, key=lambda s: (-s.accuracy, s.step_index))
    else:
        order = sorted(stats, key=lambda s: (s.accuracy, s.step_index))
    return [
        (rank, s.step_index, s.accuracy)
        for rank, s in enumerate(order, 1)]


def competence_barrier(stats):
    '''Predicted episode success if every step were drawn independently with
    the profiled rates: for full steps, and counting only move finding or
    only move execution errors.'''
    def survival(rates):
        return float(numpy.prod([1.0 - rate for rate in rates]))
    return {
        'full_step': survival(s.error_rate for s in stats),
        verdicts.MOVE_FINDING: survival(
            s.rate_of(verdicts.MOVE_FINDING) for s in stats),
        verdicts.MOVE_EXECUTION: survival(
            s.rate_of(verdicts.MOVE_EXECUTION) for s in stats),
    }


def error_type_totals(records):
    '''Average number of errors of each type per episode.'''
    records = list(records)
    totals = collections.Counter()
    for record in records:
        totals.update(record.error_types.values())
    count = max(len(records), 1)
    return {error: totals[error] / count for error in verdicts.ERROR_TYPES}


def success_rate(records) -> Optional[float]:
    records = list(records)
    if not records:
        return None
    return sum(record.success for record in records) / len(records)
