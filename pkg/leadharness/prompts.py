'''Prompt rendering.

Every prompt is the fixed puzzle description followed by a task block for the
prompt variant.  Only the task instance is substituted into the block: the
puzzle size, the anchor state, the index of the step to predict and, for
lookahead, the rollout depth.  Templates live in ``templates/`` as
`string.Template` text with ``$name`` placeholders.
'''

import functools
import hashlib
import os
from string import Template

from . import puzzle
from .errors import UnsupportedVariant
from .step import KINDS, format_state


ATOMIC = 'atomic'
LOOKAHEAD = 'lookahead'
ITERATIVE = 'iterative'
SINGLE_SHOT = 'single_shot'
CURRICULUM = 'curriculum'
VARIANTS = (ATOMIC, LOOKAHEAD, ITERATIVE, SINGLE_SHOT, CURRICULUM)

# Variants asking for a whole (remaining) solution rather than k steps
OPEN_ENDED = (ITERATIVE, SINGLE_SHOT, CURRICULUM)

# Size of the warm-up instance solved before the target in curriculum prompts
WARMUP_N = 2

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), 'templates')


@functools.lru_cache(maxsize=None)
def _read(name):
    with open(os.path.join(TEMPLATE_DIR, name + '.txt'),
              encoding='utf-8') as template_file:
        return template_file.read().rstrip('\n')


def template_name(variant, kind):
    if variant not in VARIANTS or kind not in KINDS:
        raise UnsupportedVariant(
            'No %r prompt for puzzle %r' % (variant, kind))
    return '%s_%s' % (kind, variant)


@functools.lru_cache(maxsize=None)
def template_text(variant, kind):
    '''The complete template for one variant: the puzzle description, then
    the task block with the solving algorithm inlined.'''
    name = template_name(variant, kind)
    block = Template(_read(name)).safe_substitute(
        algorithm=_read(kind + '_algorithm'))
    return _read(kind + '_puzzle') + '\n\n' + block + '\n'


@functools.lru_cache(maxsize=None)
def template_hash(variant, kind):
    text = template_text(variant, kind).encode('utf-8')
    return hashlib.sha256(text).hexdigest()[:16]


def substitutions(variant, kind, n, anchor_state, extra=None):
    '''The placeholder values for one task instance.  extra may carry
    ``step_id`` (the 0-based index of the step to predict, which is the
    number of moves already made) and ``depth``.'''
    template_name(variant, kind)
    extra = extra or {}
    values = {
        'n': str(n),
        'state': format_state(anchor_state),
        'step_id': str(extra.get('step_id', 0)),
        'depth': str(extra.get('depth', 1)),
    }
    if variant == CURRICULUM:
        values['warmup_n'] = str(WARMUP_N)
        values['warmup_state'] = format_state(
            puzzle.initial_state(kind, WARMUP_N))
    return values


def render_prompt(variant, kind, n, anchor_state, extra=None):
    return Template(template_text(variant, kind)).substitute(
        substitutions(variant, kind, n, anchor_state, extra))


def prompt_record(variant, kind, n, anchor_state, extra=None,
                  full_text=False):
    '''How a prompt is stored in a transcript: the template hash and the
    substitution map, plus the rendered text if asked for.'''
    values = substitutions(variant, kind, n, anchor_state, extra)
    record = {
        'template': template_name(variant, kind),
        'template_hash': template_hash(variant, kind),
        'substitutions': values,
    }
    if full_text:
        record['text'] = Template(template_text(variant, kind)).substitute(
            values)
    return record
