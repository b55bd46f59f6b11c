'''Episode transcripts as JSON Lines.

An episode transcript starts with a header line (phase ``episode``) holding
what is needed to rebuild the `EpisodeRecord`, continues with one line per
`TranscriptEntry` in the order the executor produced them, and ends with a
footer line (phase ``end``) holding the number of committed steps and the
graded summary.  Keys are written sorted so that equal records give equal
bytes.

Entry keys: ``episode``, ``step_index`` (0-based), ``phase``,
``anchor_index``, ``prompt`` (template, template_hash, substitutions and
optionally text), ``raw_text``, ``steps`` (``move``, ``state``,
``step_id``), ``classification``, ``latency``, ``usage`` (calls,
prompt_tokens, completion_tokens) and ``detail``.
'''

import json
import logging

from . import grading
from .agents import Usage
from .errors import IncompleteTranscript, TranscriptError
from .records import EpisodeRecord, TranscriptEntry
from .verdicts import COMMIT


log = logging.getLogger(__name__)

HEADER = 'episode'
FOOTER = 'end'


def _dumps(record):
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def _write_lines(sink, lines):
    if hasattr(sink, 'write'):
        for line in lines:
            sink.write(line + '\n')
        return
    try:
        with open(sink, 'a', encoding='utf-8') as output:
            for line in lines:
                output.write(line + '\n')
    except OSError as error:
        raise TranscriptError(
            'Cannot write %s: %s' % (sink, error.strerror)) from error


def write_transcript(sink, entries, header=None, footer=None):
    '''Appends entries to sink, a path or an open text file, one JSON
    object per line.  header and footer are extra mappings written before
    and after the entries, tagged with their phase.'''
    lines = []
    if header is not None:
        lines.append(_dumps(dict(header, phase=HEADER)))
    lines.extend(_dumps(entry.to_json()) for entry in entries)
    if footer is not None:
        lines.append(_dumps(dict(footer, phase=FOOTER)))
    _write_lines(sink, lines)


def _read_lines(path):
    try:
        with open(path, encoding='utf-8') as source:
            text = source.read()
    except OSError as error:
        raise TranscriptError(
            'Cannot read %s: %s' % (path, error.strerror)) from error
    for number, line in enumerate(text.split('\n'), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as error:
            raise TranscriptError(
                'malformed JSON in %s: %s' % (path, error), number) from error
        if not isinstance(record, dict) or 'phase' not in record:
            raise TranscriptError(
                'not a transcript entry in %s' % path, number)
        yield number, record


def read_episode(path):
    '''Returns (header, entries, footer) from a transcript file; header and
    footer are None when the file lacks them.'''
    header = footer = None
    entries = []
    kind = None
    for number, record in _read_lines(path):
        phase = record['phase']
        if phase == HEADER:
            header = record
            kind = record.get('kind')
        elif phase == FOOTER:
            footer = record
        else:
            try:
                entries.append(TranscriptEntry.from_json(record, kind))
            except (KeyError, TypeError, ValueError, IndexError) as error:
                raise TranscriptError(
                    'bad entry in %s: %r' % (path, error), number) from error
    return header, entries, footer


def read_transcript(path):
    '''The transcript entries in path, without header and footer.  An empty
    file holds no entries.'''
    return read_episode(path)[1]


def write_episode(sink, record):
    '''Writes the complete transcript of a graded episode record to sink, a
    path or an open text file.'''
    write_transcript(
        sink, record.entries, record.header(),
        {'committed': len(record.steps), 'summary': record.summary()})


def _usage_of(entries):
    usage = Usage()
    for entry in entries:
        if entry.phase != COMMIT:
            usage = usage + entry.usage
    return usage


def replay(source):
    '''Rebuilds an EpisodeRecord from a transcript path, or from the
    (header, entries, footer) triple of `read_episode`, and grades its
    committed steps again.  Raises IncompleteTranscript if the header or
    footer is missing or commit entries are missing.'''
    if isinstance(source, tuple):
        header, entries, footer = source
    else:
        header, entries, footer = read_episode(source)
    if header is None:
        raise IncompleteTranscript('Transcript has no episode header')
    if footer is None:
        raise IncompleteTranscript('Transcript has no end line')

    commits = [entry for entry in entries if entry.phase == COMMIT]
    if len(commits) != footer.get('committed'):
        raise IncompleteTranscript(
            'Transcript holds %d commit entries, expected %s' % (
                len(commits), footer.get('committed')))
    for entry in commits:
        if len(entry.steps) != 1:
            raise IncompleteTranscript(
                'Commit entry for step %d holds %d steps' % (
                    entry.step_index, len(entry.steps)))

    record = EpisodeRecord(
        strategy=header['strategy'],
        kind=header['kind'],
        n=header['n'],
        episode=header.get('episode', 0),
        config=header.get('config', {}),
        step_budget=header.get('step_budget', 0),
        steps=[entry.steps[0] for entry in commits],
        decisions=[entry.detail for entry in commits],
        entries=list(entries),
        usage=_usage_of(entries),
        rounds=header.get('rounds', 0),
        halt_index=header.get('halt_index'),
        halt_reason=header.get('halt_reason'),
        budget_exceeded=header.get('budget_exceeded', False))
    record = grading.grade_episode(record)
    log.debug(
        'Replayed %s episode %d: %s', record.strategy, record.episode,
        record.outcome)
    return record


__all__ = [
    'write_transcript', 'read_transcript', 'read_episode', 'write_episode',
    'replay',
]
