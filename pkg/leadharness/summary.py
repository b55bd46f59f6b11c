'''Summary tables.

Every table is a list of rows (dicts) with a fixed column order, written
as CSV with a header row.  Success values are percentages with one
decimal; other fractions have four.
'''

import collections
import csv
import logging
import os

from . import analytics, verdicts
from .errors import NoErrors


log = logging.getLogger(__name__)


class Table:
    def __init__(self, name, columns, rows=()):
        self.name = name
        self.columns = list(columns)
        self.rows = list(rows)

    def write(self, out_dir):
        path = os.path.join(out_dir, self.name + '.csv')
        with open(path, 'w', encoding='utf-8', newline='') as output:
            writer = csv.DictWriter(
                output, self.columns, lineterminator='\n')
            writer.writeheader()
            writer.writerows(self.rows)
        return path


def percent(fraction):
    return '%.1f' % (100.0 * fraction)


def fraction(value):
    return '%.4f' % value


def group_label(record):
    return '%s n=%d' % (record.strategy, record.n)


def _by_strategy_and_n(records):
    groups = collections.OrderedDict()
    for record in sorted(records, key=lambda r: (r.strategy, r.n)):
        groups.setdefault((record.strategy, record.n), []).append(record)
    return groups


def success_table(records):
    '''Success percentage by (strategy, n), with the counts it is made of.'''
    rows = []
    for (strategy, n), group in _by_strategy_and_n(records).items():
        successes = sum(record.success for record in group)
        rows.append({
            'strategy': strategy, 'n': n, 'episodes': len(group),
            'successes': successes,
            'success_pct': percent(successes / len(group)),
        })
    return Table(
        'success', ['strategy', 'n', 'episodes', 'successes', 'success_pct'],
        rows)


def error_types_table(records):
    '''Average errors of each type per episode, by (strategy, n).'''
    rows = []
    for (strategy, n), group in _by_strategy_and_n(records).items():
        totals = analytics.error_type_totals(group)
        row = {'strategy': strategy, 'n': n}
        row.update(
            (error, fraction(totals[error])) for error in verdicts.ERROR_TYPES)
        rows.append(row)
    return Table(
        'error_types', ['strategy', 'n'] + list(verdicts.ERROR_TYPES), rows)


def histogram_table(stats, bins=10):
    '''How many steps fall in each error rate bucket.'''
    return Table(
        'step_error_histogram', ['low', 'high', 'steps'], [
            {'low': '%.2f' % low, 'high': '%.2f' % high, 'steps': steps}
            for low, high, steps in
            analytics.error_rate_histogram(stats, bins)])


def step_errors_table(stats):
    rows = []
    for s in stats:
        row = {
            'step_index': s.step_index, 'samples': s.samples,
            'error_rate': fraction(s.error_rate)}
        row.update(
            (error, s.breakdown.get(error, 0))
            for error in verdicts.ERROR_TYPES)
        rows.append(row)
    return Table(
        'step_errors',
        ['step_index', 'samples', 'error_rate'] + list(verdicts.ERROR_TYPES),
        rows)


def barrier_table(stats):
    '''Predicted success for full steps, move finding alone and move
    execution alone, from per-step error rates.'''
    barrier = analytics.competence_barrier(stats)
    return Table(
        'competence_barrier', ['component', 'predicted_success_pct'], [
            {'component': component, 'predicted_success_pct': percent(value)}
            for component, value in barrier.items()])


def rank_table(columns):
    '''Per-step accuracies sorted ascending, one pair of columns per
    labelled set of stats in columns, a {label: stats} map.'''
    ranked = {
        label: analytics.rank_order_accuracies(stats)
        for label, stats in columns.items()}
    rows = []
    for rank in range(1, max(map(len, ranked.values()), default=0) + 1):
        row = {'rank': rank}
        for label, order in ranked.items():
            if rank <= len(order):
                _, step_index, accuracy = order[rank - 1]
                row[label + '_step'] = step_index
                row[label + '_accuracy'] = fraction(accuracy)
        rows.append(row)
    header = ['rank']
    for label in columns:
        header.extend([label + '_step', label + '_accuracy'])
    return Table('rank_order', header, rows)


def _distribution(records):
    try:
        return analytics.conditional_error_distribution(records)
    except NoErrors:
        return None


def tv_table(groups, splits=10, seed=0):
    '''Pairwise TV distances between the failure distributions of groups, a
    {label: records} map, with each group's random split self baseline.
    Cells are empty where a group has no failures to compare.'''
    labels = list(groups)
    distributions = {
        label: _distribution(groups[label]) for label in labels}
    rows = []
    for a in labels:
        row = {'group': a}
        for b in labels:
            p, q = distributions[a], distributions[b]
            row[b] = '' if p is None or q is None else \
                fraction(analytics.tv_distance(p, q))
        try:
            row['self_baseline'] = fraction(
                analytics.self_distance_baseline(groups[a], splits, seed))
        except NoErrors:
            row['self_baseline'] = ''
        rows.append(row)
    return Table('tv_distance', ['group'] + labels + ['self_baseline'], rows)


def positional_table(positional):
    '''Accuracy of the prediction for each step by rollout offset, and the
    pooled accuracy per offset in a final ``all`` row.'''
    offsets = ['offset_%d' % o for o in range(1, positional.k + 1)]
    steps = sorted(set(
        anchor + offset - 1 for anchor, row in positional.matrix.items()
        for offset in row))
    rows = []
    for index in steps:
        row = {'step_index': index}
        accuracy = positional.step_accuracy(index)
        row.update(
            ('offset_%d' % o, fraction(value))
            for o, value in accuracy.items())
        rows.append(row)
    pooled = {'step_index': 'all'}
    pooled.update(
        ('offset_%d' % o, fraction(value))
        for o, value in positional.accuracy.items())
    rows.append(pooled)
    name = 'positional_conditioned' if positional.conditioned \
        else 'positional'
    return Table(name, ['step_index'] + offsets, rows)


def decision_votes(decision):
    '''Samples spent on one committed step, from its decision record.'''
    votes = decision.get('base_votes', 0)
    tally = decision.get('tally')
    if tally is not None:
        if decision.get('seed_base_votes'):
            # Base predictions already counted in the tally
            votes = 0
        votes += tally['total_votes'] + tally['discarded']
    elif 'votes' in decision:
        votes += decision['votes']
    return votes or 1


def votes_table(records):
    '''Mean samples and agent calls per step index.  Calls are only counted
    from records whose exchanges were kept.'''
    votes = collections.defaultdict(list)
    unanimous = collections.Counter()
    calls = collections.defaultdict(list)
    for record in records:
        for index, decision in enumerate(record.decisions):
            votes[index].append(decision_votes(decision))
            if decision.get('unanimous'):
                unanimous[index] += 1
        exchanges = collections.Counter(
            entry.step_index for entry in record.entries
            if entry.phase != verdicts.COMMIT)
        if exchanges:
            for index in range(len(record.decisions)):
                calls[index].append(exchanges[index])
    rows = []
    for index in sorted(votes):
        count = len(votes[index])
        rows.append({
            'step_index': index,
            'episodes': count,
            'mean_votes': fraction(sum(votes[index]) / count),
            'mean_calls':
                fraction(sum(calls[index]) / len(calls[index]))
                if calls[index] else '',
            'unanimous_pct': percent(unanimous[index] / count),
        })
    return Table(
        'votes_per_step',
        ['step_index', 'episodes', 'mean_votes', 'mean_calls',
            'unanimous_pct'],
        rows)


def summarize(
        records, groups=None, stats=None, positional=(), splits=10, seed=0):
    '''Builds the summary tables for records.  groups labels the record
    sets compared in the TV table (by default one per strategy and n);
    stats from `analytics.profile_step_errors` adds the step error tables
    and positional accuracies add their matrices.'''
    records = list(records)
    assert records, 'Nothing to summarize'
    if groups is None:
        groups = collections.OrderedDict()
        for record in records:
            groups.setdefault(group_label(record), []).append(record)
    tables = [
        success_table(records),
        error_types_table(records),
        votes_table(records),
        tv_table(groups, splits, seed),
    ]
    if stats:
        tables.append(step_errors_table(stats))
        tables.append(histogram_table(stats))
    tables.extend(positional_table(p) for p in positional)
    return tables


def write_summary(tables, out_dir):
    '''Writes every table as <name>.csv under out_dir, returning paths.'''
    os.makedirs(out_dir, exist_ok=True)
    paths = [table.write(out_dir) for table in tables]
    log.info('Wrote %d summary tables to %s', len(paths), out_dir)
    return paths


__all__ = [
    'Table', 'summarize', 'write_summary', 'success_table', 'tv_table',
    'positional_table', 'votes_table', 'histogram_table', 'barrier_table',
    'rank_table',
]
