'''Reading solutions out of free model text.

A reply is searched for assignments of the form ``solution = ...`` or
``moves = ...``.  The literal after the ``=`` is cut out by bracket matching
and read with `ast.literal_eval`, which accepts exactly the listing grammar
(single quoted strings, bare integers, nested lists and dicts, trailing
commas).  Reasoning text often contains drafts, so assignments are tried
from last to first and the last well formed one wins.
'''

import ast
import re

from . import puzzle
from .step import Step


OK = 'ok'
TRUNCATED = 'truncated'
MALFORMED = 'malformed'
PARSE_STATUSES = (OK, TRUNCATED, MALFORMED)

_ASSIGNMENT = re.compile(r'\b(solution|moves)\s*=\s*(?=[\[{])')
_OPENERS = {'[': ']', '{': '}'}


def _literal_at(text, start):
    '''Returns the bracketed literal beginning at text[start], or None if
    the brackets never balance.'''
    stack = []
    quote = None
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if quote:
            if escaped:
                escaped = False
            elif ch == '\\':
                escaped = True
            elif ch == quote:
                quote = None
        elif ch in '\'"':
            quote = ch
        elif ch in _OPENERS:
            stack.append(_OPENERS[ch])
        elif ch in ']}':
            if not stack or stack.pop() != ch:
                return None
            if not stack:
                return text[start:i + 1]
    return None


def _record_to_step(kind, record):
    if not isinstance(record, dict) or 'move' not in record:
        raise ValueError('Record is not a dict with a move')
    if 'state' in record:
        state = record['state']
    elif 'new_state' in record:
        state = record['new_state']
    else:
        raise ValueError('Record has no state')
    step_id = record.get('step_id', record.get('new_step_id'))
    if step_id is not None and not isinstance(step_id, int):
        raise ValueError('Bad step id %r' % (step_id,))
    return Step(
        puzzle.make_move(kind, list(record['move'])),
        puzzle.make_state(kind, list(state)),
        step_id)


def _steps_from_literal(kind, value):
    records = [value] if isinstance(value, dict) else value
    if not isinstance(records, (list, tuple)):
        raise ValueError('Solution is neither a record nor a list')
    return [_record_to_step(kind, record) for record in records]


def find_solutions(text, kind, names=('solution', 'moves')):
    '''Yields the step lists of every well formed assignment in text, last
    assignment first.'''
    matches = [
        m for m in _ASSIGNMENT.finditer(text or '') if m.group(1) in names]
    for match in reversed(matches):
        literal = _literal_at(text, match.end())
        if literal is None:
            continue
        try:
            value = ast.literal_eval(literal)
            yield _steps_from_literal(kind, value)
        except (ValueError, SyntaxError, TypeError, MemoryError,
                RecursionError):
            continue


def parse_solution_text(text, kind, expectation=None):
    '''Returns (steps, parse_status).

    expectation is the number of steps asked for (atomic and lookahead
    prompts) or None when any non-empty listing is acceptable.  Extra steps
    beyond the expectation are dropped; fewer steps give TRUNCATED; no
    readable assignment gives MALFORMED with no steps.'''
    for steps in find_solutions(text, kind):
        if expectation is None:
            return steps, (OK if steps else TRUNCATED)
        if len(steps) >= expectation:
            return steps[:expectation], OK
        return steps, TRUNCATED
    return [], MALFORMED
