import asyncio
from types import SimpleNamespace

import httpx
import openai
import pydantic
import pytest

from leadharness import listing, prompts, puzzle
from leadharness.agents import RolloutRequest, Usage
from leadharness.endpoint import (
    API_KEY_VARIABLE, EndpointConfig, LlmAgent, make_client)
from leadharness.errors import EndpointError, RateLimited
from leadharness.step import CHECKERS, HANOI, format_listing


URL = 'https://endpoint.invalid/v1/chat/completions'

ATOMIC_REPLY = '''\
The red checker at 3 slides into the empty cell.
solution = {'move': ['R', 3, 4],
            'new_state': ['B', 'B', 'B', '_', 'R', 'R', 'R']}
'''


def connection_error():
    return openai.APIConnectionError(request=httpx.Request('POST', URL))


def status_error(cls, status):
    request = httpx.Request('POST', URL)
    return cls(
        'failed', response=httpx.Response(status, request=request),
        body=None)


class FakeCompletions:
    '''Stands in for ``client.chat.completions``.  Each reply is text or an
    exception to raise; the last reply repeats.'''

    def __init__(self, replies, delay=0):
        self.replies = list(replies)
        self.delay = delay
        self.calls = []
        self.in_flight = 0
        self.most_in_flight = 0

    async def create(self, **arguments):
        self.calls.append(arguments)
        self.in_flight += 1
        self.most_in_flight = max(self.most_in_flight, self.in_flight)
        try:
            await asyncio.sleep(self.delay)
            reply = self.replies.pop(0) if len(self.replies) > 1 \
                else self.replies[0]
            if isinstance(reply, Exception):
                raise reply
            return SimpleNamespace(
                choices=[SimpleNamespace(
                    message=SimpleNamespace(content=reply))],
                usage=SimpleNamespace(
                    prompt_tokens=120, completion_tokens=30))
        finally:
            self.in_flight -= 1


def fake_client(replies, delay=0):
    return SimpleNamespace(
        chat=SimpleNamespace(completions=FakeCompletions(replies, delay)))


def make_agent(replies, delay=0, **config):
    config.setdefault('max_attempts', 2)
    return LlmAgent(EndpointConfig(**config), fake_client(replies, delay))


def atomic_request():
    return RolloutRequest(CHECKERS, 3, tuple('BBBR_RR'), 9)


def test_atomic_reply():
    with make_agent([ATOMIC_REPLY]) as agent:
        response = agent(atomic_request())
    assert response.parse_status == listing.OK
    [step] = response.steps
    assert tuple(step.move) == ('R', 3, 4)
    assert response.raw_text == ATOMIC_REPLY
    assert response.usage == Usage(1, 120, 30)


def test_prompt_and_settings_sent():
    with make_agent(
            [ATOMIC_REPLY], model='test-model', temperature=0.7,
            reasoning_effort='low', max_output_tokens=1000) as agent:
        request = atomic_request()
        agent(request)
        [arguments] = agent.client.chat.completions.calls
    assert arguments['model'] == 'test-model'
    assert arguments['temperature'] == 0.7
    assert arguments['reasoning_effort'] == 'low'
    assert arguments['max_completion_tokens'] == 1000
    [message] = arguments['messages']
    assert message['role'] == 'user'
    assert message['content'] == prompts.render_prompt(
        prompts.ATOMIC, CHECKERS, 3, request.anchor_state,
        request.prompt_extra())


def test_unset_settings_not_sent():
    with make_agent([ATOMIC_REPLY]) as agent:
        agent(atomic_request())
        [arguments] = agent.client.chat.completions.calls
    assert 'temperature' not in arguments
    assert 'reasoning_effort' not in arguments


def test_malformed_reply():
    with make_agent(['I cannot']) as agent:
        response = agent(atomic_request())
    assert response.parse_status == listing.MALFORMED
    assert response.steps == ()
    assert response.raw_text == 'I cannot'


def test_empty_content():
    with make_agent([None]) as agent:
        response = agent(atomic_request())
    assert response.parse_status == listing.MALFORMED
    assert response.raw_text == ''


def test_lookahead_reply():
    steps = puzzle.oracle_trajectory(HANOI, 4)[:8]
    text = 'Here goes.\n' + format_listing(steps, with_step_id=True)
    request = RolloutRequest(
        HANOI, 4, puzzle.initial_state(HANOI, 4), 0, depth=8,
        variant=prompts.LOOKAHEAD)
    with make_agent([text]) as agent:
        response = agent(request)
    assert response.parse_status == listing.OK
    assert list(response.steps) == list(steps)


def test_transient_failure_retried():
    with make_agent([connection_error(), ATOMIC_REPLY]) as agent:
        response = agent(atomic_request())
        assert len(agent.client.chat.completions.calls) == 2
    assert response.parse_status == listing.OK


def test_retries_exhausted():
    with make_agent([connection_error()]) as agent:
        with pytest.raises(EndpointError):
            agent(atomic_request())
        assert len(agent.client.chat.completions.calls) == 2


def test_rate_limited():
    error = status_error(openai.RateLimitError, 429)
    with make_agent([error]) as agent:
        with pytest.raises(RateLimited):
            agent(atomic_request())


def test_rate_limited_is_endpoint_error():
    assert issubclass(RateLimited, EndpointError)


def test_bad_request_not_retried():
    error = status_error(openai.BadRequestError, 400)
    with make_agent([error], max_attempts=5) as agent:
        with pytest.raises(EndpointError):
            agent(atomic_request())
        assert len(agent.client.chat.completions.calls) == 1


def test_batch_bounded_in_flight():
    with make_agent([ATOMIC_REPLY], delay=0.02, max_in_flight=2) as agent:
        responses = agent.batch([atomic_request()] * 6)
        completions = agent.client.chat.completions
    assert [r.parse_status for r in responses] == [listing.OK] * 6
    assert len(completions.calls) == 6
    assert 1 <= completions.most_in_flight <= 2


def test_requests_paced():
    with make_agent([ATOMIC_REPLY], requests_per_minute=1200) as agent:
        loop = agent.dispatcher.loop
        start = agent.dispatcher(loop.time)
        agent.batch([atomic_request()] * 3)
        elapsed = agent.dispatcher(loop.time) - start
    # Three requests at 20 per second need two gaps of 50ms
    assert elapsed >= 0.09


@pytest.mark.parametrize(
    "fields", [
        dict(max_attempts=0),
        dict(max_in_flight=0),
        dict(requests_per_minute=-1),
        dict(timeout=0),
        dict(modle='typo'),
    ])
def test_config_rejects(fields):
    with pytest.raises(pydantic.ValidationError):
        EndpointConfig(**fields)


def test_missing_api_key(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(API_KEY_VARIABLE, '')
    monkeypatch.delenv(API_KEY_VARIABLE)
    with pytest.raises(EndpointError, match=API_KEY_VARIABLE):
        make_client(EndpointConfig())


def test_api_key_from_dotenv(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(API_KEY_VARIABLE, '')
    monkeypatch.delenv(API_KEY_VARIABLE)
    tmp_path.joinpath('.env').write_text(
        '%s=sk-test\n' % API_KEY_VARIABLE)
    client = make_client(EndpointConfig(base_url='http://localhost:1/v1'))
    assert isinstance(client, openai.AsyncOpenAI)
    assert client.api_key == 'sk-test'
