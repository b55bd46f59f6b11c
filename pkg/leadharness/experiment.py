'''Running experiments into run directories.

A run directory holds::

    manifest.txt                    the RunManifest, as YAML text
    transcripts/<puzzle>-n<n>/episode-<episode>.jsonl
    summary/*.csv                   tables from `leadharness.summary`

Episodes are independent: each gets its own agent (sharing one endpoint
agent for remote models) and its own transcript file, so with ``parallel``
above 1 they run on a thread pool.  Summaries are written after every
episode has finished.
'''

import glob
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List

import yaml

from . import analytics, prompts, summary, transcript, verdicts
from ._version_git import source_revision
from .agents import Usage
from .errors import TranscriptError
from .executors import run_episode


log = logging.getLogger(__name__)

MANIFEST = 'manifest.txt'
TRANSCRIPTS = 'transcripts'
SUMMARY = 'summary'


@dataclass
class RunManifest:
    '''What was run and with what.  The config snapshot holds the complete
    strategy, agent and plan settings including seeds, which is all that is
    needed to repeat a mock agent run exactly.'''
    run_id: str
    timestamp: str
    config: Dict[str, Any]
    kind: str
    sizes: List[int]
    revision: str = field(default_factory=source_revision)
    totals: Dict[str, int] = field(default_factory=dict)

    def to_text(self):
        return yaml.safe_dump(asdict(self), sort_keys=False)

    def write(self, run_dir):
        path = os.path.join(run_dir, MANIFEST)
        with open(path, 'w', encoding='utf-8') as output:
            output.write(self.to_text())
        return path

    @classmethod
    def read(cls, run_dir):
        with open(os.path.join(run_dir, MANIFEST), encoding='utf-8') as f:
            return cls(**yaml.safe_load(f))


def make_run_id(config, now):
    return '%s-%s-s%d-%s' % (
        config.strategy.strategy, config.plan.puzzle, config.plan.seed,
        now.strftime('%Y%m%dT%H%M%S'))


def transcript_path(run_dir, kind, n, episode):
    return os.path.join(
        run_dir, TRANSCRIPTS, '%s-n%d' % (kind, n),
        'episode-%04d.jsonl' % episode)


def _totals(records):
    usage = sum((record.usage for record in records), Usage())
    return {
        'episodes': len(records),
        'successes': sum(record.success for record in records),
        'calls': usage.calls,
        'prompt_tokens': usage.prompt_tokens,
        'completion_tokens': usage.completion_tokens,
    }


class _Runner:
    def __init__(self, config, run_dir):
        self.config = config
        self.run_dir = run_dir
        self.shared_agent = None
        if config.agent.kind == 'endpoint':
            self.shared_agent = config.agent.make_agent()

    def agent(self, episode):
        if self.shared_agent is not None:
            return self.shared_agent
        return self.config.agent.make_agent(episode, self.config.plan.seed)

    def episode(self, n, episode):
        plan = self.config.plan
        record = run_episode(
            self.agent(episode), plan.puzzle, n, self.config.strategy,
            episode, full_prompts=plan.include_prompts)
        path = transcript_path(self.run_dir, plan.puzzle, n, episode)
        # One writer per transcript file
        with open(path, 'w', encoding='utf-8') as output:
            transcript.write_episode(output, record)
        return record

    def close(self):
        if self.shared_agent is not None:
            self.shared_agent.close()


def run_experiment(config, run_id=None, now=None):
    '''Runs every episode of config's plan for each puzzle size, writing
    transcripts, summary tables and the manifest.  Returns (run_dir,
    manifest, records).'''
    plan = config.plan
    now = now or datetime.now(timezone.utc)
    run_id = run_id or make_run_id(config, now)
    run_dir = os.path.join(plan.out_dir, run_id)
    for n in plan.sizes:
        config.strategy.budget(plan.puzzle, n)
        os.makedirs(
            os.path.dirname(transcript_path(run_dir, plan.puzzle, n, 0)),
            exist_ok=True)

    manifest = RunManifest(
        run_id, now.isoformat(), config.model_dump(mode='json'),
        plan.puzzle, list(plan.sizes))
    log.info(
        'Run %s: %s on %s n=%s, %d episodes each', run_id,
        config.strategy.strategy, plan.puzzle, plan.sizes, plan.episodes)

    runner = _Runner(config, run_dir)
    jobs = [(n, e) for n in plan.sizes for e in range(plan.episodes)]
    try:
        if plan.parallel > 1:
            with ThreadPoolExecutor(plan.parallel) as pool:
                records = list(pool.map(
                    lambda job: runner.episode(*job), jobs))
        else:
            records = [runner.episode(n, e) for n, e in jobs]
    finally:
        runner.close()

    summary.write_summary(
        summary.summarize(
            records, splits=plan.self_distance_splits, seed=plan.seed),
        os.path.join(run_dir, SUMMARY))
    manifest.totals = _totals(records)
    manifest.write(run_dir)
    log.info(
        'Run %s finished: %d of %d episodes succeeded', run_id,
        manifest.totals['successes'], manifest.totals['episodes'])
    return run_dir, manifest, records


def run_profile(config, out_dir=None, compare_lookahead=False):
    '''Profiles the configured agent along the oracle trajectory for each
    size: per-step errors, the competence barrier estimate and positional
    accuracies of depth-k rollouts.  With compare_lookahead the first steps
    of depth-k rollouts are profiled too and rank ordered against atomic
    steps.  Writes one table directory per size and returns the paths.'''
    plan, cfg = config.plan, config.strategy
    out_dir = out_dir or os.path.join(plan.out_dir, 'profile')
    agent = config.agent.make_agent(0, plan.seed)
    directories = []
    try:
        for n in plan.sizes:
            stats = analytics.profile_step_errors(
                agent, plan.puzzle, n, plan.profile_samples)
            tables = [
                summary.step_errors_table(stats),
                summary.histogram_table(stats),
                summary.barrier_table(stats),
            ]
            ranks = {'atomic': stats}
            if compare_lookahead and cfg.k > 1:
                ranks['lookahead'] = analytics.profile_step_errors(
                    agent, plan.puzzle, n, plan.profile_samples,
                    prompts.LOOKAHEAD, cfg.k)
            tables.append(summary.rank_table(ranks))
            for conditioned in (False, True):
                tables.append(summary.positional_table(
                    analytics.lookahead_positional_accuracy(
                        agent, plan.puzzle, n, cfg.k,
                        plan.positional_samples, conditioned)))
            directory = os.path.join(out_dir, '%s-n%d' % (plan.puzzle, n))
            summary.write_summary(tables, directory)
            directories.append(directory)
    finally:
        if hasattr(agent, 'close'):
            agent.close()
    return directories


def find_transcripts(path):
    '''Transcript files under path: a run directory, a directory of
    transcripts or a single file.'''
    if os.path.isfile(path):
        return [path]
    return sorted(
        glob.glob(os.path.join(path, '**', '*.jsonl'), recursive=True))


def load_records(path):
    '''Replays every transcript under path.'''
    return [transcript.replay(f) for f in find_transcripts(path)]


def analyze(paths, out_dir, splits=10, seed=0):
    '''Summary tables over the transcripts in paths, each path (usually a
    run directory) forming one group of the TV table.  Adds positional
    accuracy from lookahead rollouts and a rank ordering of per-step
    accuracies from the depth-1 samples when the transcripts hold them.'''
    groups = {}
    for path in paths:
        label = os.path.basename(os.path.normpath(path))
        groups[label] = load_records(path)
    records = [r for group in groups.values() for r in group]
    if not records:
        raise TranscriptError('No transcripts under %s' % ', '.join(paths))
    tables = summary.summarize(records, groups, splits=splits, seed=seed)

    by_size = {}
    for record in records:
        by_size.setdefault((record.kind, record.n), []).append(record)
    ranks = {}
    for (kind, n), group in sorted(by_size.items()):
        stats = analytics.transcript_step_errors(group)
        if stats:
            ranks['%s_n%d' % (kind, n)] = stats
        if any(entry.phase == verdicts.LOOKAHEAD_VOTE
               for r in group for entry in r.entries):
            for conditioned in (False, True):
                table = summary.positional_table(
                    analytics.transcript_positional_accuracy(
                        group, conditioned=conditioned))
                table.name += '_%s_n%d' % (kind, n)
                tables.append(table)
    if ranks:
        tables.append(summary.rank_table(ranks))
    return summary.write_summary(tables, out_dir)


__all__ = [
    'RunManifest', 'run_experiment', 'run_profile', 'analyze',
    'load_records', 'find_transcripts', 'transcript_path',
]
