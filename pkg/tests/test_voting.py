import numpy
import pytest

from conftest import binomial_tolerance

from leadharness.errors import Exhausted
from leadharness.voting import VoteTally, vote_first_to_ahead


def stream(*candidates):
    '''A sampler handing out candidates in order, batch at a time.'''
    remaining = iter(candidates)

    def sampler(batch):
        return [next(remaining) for _ in range(batch)]
    sampler.remaining = remaining
    return sampler


def test_unanimous():
    winner, tally = vote_first_to_ahead(stream('A', 'A', 'A'), 3)
    assert winner == 'A'
    assert tally.total_votes == 3
    assert tally.rounds_used == 3
    assert not tally.margin_not_reached


def test_margin_arithmetic():
    winner, tally = vote_first_to_ahead(stream('A', 'B', 'A', 'A', 'A'), 3)
    assert winner == 'A'
    assert tally.total_votes == 5
    assert tally.counts == {'A': 4, 'B': 1}


def test_stops_as_soon_as_ahead():
    sampler = stream('B', 'A', 'A', 'A', 'A', 'B')
    winner, tally = vote_first_to_ahead(sampler, 3)
    assert winner == 'A'
    assert list(sampler.remaining) == ['B']


def test_batches():
    winner, tally = vote_first_to_ahead(
        stream('A', 'B', 'A', 'A', 'A', 'A'), 3, batch=2)
    assert winner == 'A'
    assert tally.rounds_used == 3
    assert tally.total_votes == 6


def test_malformed_discarded():
    winner, tally = vote_first_to_ahead(
        stream(None, 'A', None, 'A'), 2)
    assert winner == 'A'
    assert tally.discarded == 2
    assert tally.total_votes == 2
    assert tally.rounds_used == 4


def test_exhausted():
    with pytest.raises(Exhausted):
        vote_first_to_ahead(stream(None, None, None), 1, max_rounds=3)


def test_margin_not_reached_plurality():
    winner, tally = vote_first_to_ahead(
        stream('B', 'A', 'B', 'A', 'C'), 3, max_rounds=5)
    # A and B tie on two votes, the smaller key wins
    assert winner == 'A'
    assert tally.margin_not_reached


def test_key_maps_identity():
    candidates = [('B', 0), ('A', 1), ('A', 2), ('A', 3)]
    winner, tally = vote_first_to_ahead(
        stream(*candidates), 2, key=lambda c: c[0])
    # The first candidate seen stands for its key
    assert winner == ('A', 1)
    assert tally.counts == {'A': 3, 'B': 1}


def test_continues_given_tally():
    tally = VoteTally()
    tally.add('A', 'A')
    tally.add('A', 'A')
    winner, tally = vote_first_to_ahead(stream('A'), 3, tally=tally)
    assert winner == 'A'
    assert tally.total_votes == 3
    assert tally.rounds_used == 1


def test_margin_sound():
    '''Without the flag the winner always leads the runner up by t.'''
    rng = numpy.random.default_rng(11)
    for _ in range(300):
        t = int(rng.integers(1, 5))

        def sampler(batch):
            return list(rng.choice(['A', 'B', 'C'], size=batch, p=[
                0.5, 0.3, 0.2]))
        winner, tally = vote_first_to_ahead(
            sampler, t, batch=int(rng.integers(1, 4)), max_rounds=20)
        if not tally.margin_not_reached:
            others = [
                count for key, count in tally.counts.items() if key != winner]
            assert tally.counts[winner] - max(others, default=0) >= t
        assert tally.total_votes == sum(tally.counts.values())


def test_consistent_wrong_answer_law():
    '''A correct answer at 0.4 against one consistent wrong answer at 0.6
    wins first to ahead by 3 with the gambler's ruin probability.'''
    p, t, trials = 0.4, 3, 10000
    ratio = (1 - p) / p
    expected = (1 - ratio ** t) / (1 - ratio ** (2 * t))
    assert expected == pytest.approx(0.229, abs=1e-3)

    rng = numpy.random.default_rng(2024)

    def sampler(batch):
        return ['right' if x < p else 'wrong' for x in rng.random(batch)]
    wins = sum(
        vote_first_to_ahead(sampler, t, max_rounds=1000)[0] == 'right'
        for _ in range(trials))
    assert abs(wins / trials - expected) <= binomial_tolerance(
        expected, trials)


def test_tally_json():
    tally = VoteTally()
    for key in ['b', 'a', None, 'b']:
        tally.add(key, key)
    assert tally.to_json() == {
        'counts': {'a': 1, 'b': 2},
        'rounds_used': 0,
        'total_votes': 3,
        'discarded': 1,
        'margin_not_reached': False,
    }
    assert tally.leader() == 'b'
    assert tally.margin() == 1
