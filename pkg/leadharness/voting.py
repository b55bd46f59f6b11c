'''First-to-ahead-by-t voting.

Candidates are drawn in rounds until one of them leads every rival by at
least t votes.  Candidates are compared through a canonical key (for steps,
`Step.key`, so the same move with a different claimed state is a different
candidate).  A malformed sample is passed to the tally as None: it counts
as discarded and carries no vote.
'''

from dataclasses import dataclass, field
from typing import Any, Dict

from .errors import Exhausted


@dataclass
class VoteTally:
    counts: Dict[str, int] = field(default_factory=dict)
    rounds_used: int = 0
    total_votes: int = 0
    discarded: int = 0
    margin_not_reached: bool = False
    # One representative candidate per key
    candidates: Dict[str, Any] = field(default_factory=dict, repr=False)

    def add(self, key, candidate=None):
        if key is None:
            self.discarded += 1
        else:
            self.counts[key] = self.counts.get(key, 0) + 1
            self.candidates.setdefault(key, candidate)
            self.total_votes += 1

    def ranking(self):
        '''Keys by descending count, ties broken by the smaller key.'''
        return sorted(self.counts, key=lambda key: (-self.counts[key], key))

    def margin(self):
        '''Lead of the front runner over the next candidate.'''
        ranking = self.ranking()
        if not ranking:
            return 0
        runner_up = self.counts[ranking[1]] if len(ranking) > 1 else 0
        return self.counts[ranking[0]] - runner_up

    def leader(self):
        ranking = self.ranking()
        return ranking[0] if ranking else None

    def to_json(self):
        return {
            'counts': dict(sorted(self.counts.items())),
            'rounds_used': self.rounds_used,
            'total_votes': self.total_votes,
            'discarded': self.discarded,
            'margin_not_reached': self.margin_not_reached,
        }


def _identity(candidate):
    return candidate


def vote_first_to_ahead(
        sampler, t, batch=1, max_rounds=16, key=None, tally=None):
    '''Draws rounds of ``sampler(batch)`` candidates until the leader is t
    votes ahead of every other candidate.  Returns (winner, tally).

    After max_rounds without the margin the plurality leader wins and the
    tally is flagged margin_not_reached.  key maps a candidate to its
    canonical identity (default: the candidate itself); None candidates are
    malformed.  A partly filled tally may be passed in to continue voting.
    Raises Exhausted if no round produced a single vote.'''
    assert t >= 1, 'Margin must be at least 1'
    assert batch >= 1 and max_rounds >= 1, 'Need at least one sample'
    key = key or _identity
    if tally is None:
        tally = VoteTally()

    for _ in range(max_rounds):
        for candidate in sampler(batch):
            tally.add(
                None if candidate is None else key(candidate), candidate)
        tally.rounds_used += 1
        if tally.counts and tally.margin() >= t:
            break
    else:
        if not tally.counts:
            raise Exhausted(
                'No well formed candidate in %d samples' % tally.discarded)
        tally.margin_not_reached = True

    return tally.candidates[tally.leader()], tally
