'''The Step record shared by both puzzles and its canonical text form.

States and moves are rendered in the bracketed, single quoted listing syntax
models are asked to produce, so that a rendered step can be compared
character by character with model output.'''

from dataclasses import dataclass
from typing import Any, Optional, Tuple


CHECKERS = 'checkers'
HANOI = 'hanoi'
KINDS = (CHECKERS, HANOI)


def format_move(move):
    return repr([_plain(x) for x in move])


def format_state(state):
    if state and not isinstance(state[0], str):
        return repr([[_plain(d) for d in peg] for peg in state])
    return repr([_plain(c) for c in state])


def _plain(value):
    # numpy integers must never leak into listings
    if isinstance(value, str):
        return value
    return int(value)


@dataclass(frozen=True)
class Step:
    '''One move together with the state claimed to result from it.  The
    claimed state need not satisfy the puzzle invariants: a model may drop or
    duplicate a piece, and that is exactly what grading has to detect.'''
    move: Tuple[Any, ...]
    state: Tuple[Any, ...]
    step_id: Optional[int] = None

    def key(self):
        '''Canonical vote identity: move plus claimed state, no step id.'''
        return "{'move': %s, 'state': %s}" % (
            format_move(self.move), format_state(self.state))

    def format(self, with_step_id=False):
        if with_step_id and self.step_id is not None:
            return "{'step_id': %d, 'move': %s, 'state': %s}" % (
                self.step_id, format_move(self.move),
                format_state(self.state))
        return self.key()

    def to_json(self):
        record = {
            'move': [_plain(x) for x in self.move],
            'state': _state_to_json(self.state),
        }
        if self.step_id is not None:
            record['step_id'] = self.step_id
        return record


def _state_to_json(state):
    if state and not isinstance(state[0], str):
        return [[int(d) for d in peg] for peg in state]
    return list(state)


def format_listing(steps, with_step_id=False, name='solution'):
    lines = ['%s = [' % name]
    lines.extend(
        '  %s,' % step.format(with_step_id=with_step_id) for step in steps)
    lines.append(']')
    return '\n'.join(lines)
