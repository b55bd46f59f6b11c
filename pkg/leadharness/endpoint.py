'''Agent backed by a remote chat-completion endpoint.

Each request renders its prompt, sends it as the single user message of a
chat completion, and parses the reply text.  Transient failures are retried
with exponential backoff; what is left after the retry budget is raised as
`EndpointError` (or `RateLimited`).  Requests run on an `AsyncioDispatcher`
loop so that a whole voting round can be in flight at once, bounded by
``max_in_flight`` and an optional requests-per-minute limit.
'''

import asyncio
import logging
import os
import time
from typing import Annotated, Optional

import backoff
import openai
from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from . import listing, prompts
from .agents import Agent, RolloutResponse, Usage
from .asyncio_dispatcher import AsyncioDispatcher
from .errors import EndpointError, RateLimited


log = logging.getLogger(__name__)

API_KEY_VARIABLE = 'LEAD_API_KEY'

Positive = Annotated[float, Field(gt=0)]
PositiveInt = Annotated[int, Field(gt=0)]

# Failures worth another attempt; anything else is raised at once
RETRYABLE = (
    openai.APIConnectionError,      # includes APITimeoutError
    openai.RateLimitError,
    openai.InternalServerError,
)


class EndpointConfig(BaseModel):
    '''Connection and sampling settings.  temperature and reasoning_effort
    are passed through untouched and only recorded by the harness.'''
    model_config = ConfigDict(extra='forbid', frozen=True)

    base_url: Optional[str] = None
    model: str = 'o4-mini'
    temperature: Optional[float] = None
    reasoning_effort: Optional[str] = None
    max_output_tokens: PositiveInt = 32768
    timeout: Positive = 600.0
    max_attempts: PositiveInt = 5
    backoff_max_time: Positive = 900.0
    max_in_flight: PositiveInt = 8
    requests_per_minute: Optional[Positive] = None


def make_client(config):
    load_dotenv(find_dotenv(usecwd=True))
    api_key = os.getenv(API_KEY_VARIABLE)
    if not api_key:
        raise EndpointError(
            'No API key: set %s in the environment or a .env file'
            % API_KEY_VARIABLE)
    return openai.AsyncOpenAI(
        api_key=api_key, base_url=config.base_url,
        timeout=config.timeout, max_retries=0)


class LlmAgent(Agent):
    def __init__(self, config=None, client=None, dispatcher=None):
        self.config = config or EndpointConfig()
        self.client = client if client is not None else make_client(
            self.config)
        self.__own_dispatcher = dispatcher is None
        self.dispatcher = dispatcher or AsyncioDispatcher()
        # Loop objects are created on first use inside the dispatcher loop
        self.__in_flight = None
        self.__pace_lock = None
        self.__next_slot = 0.0

        self.__complete = backoff.on_exception(
            backoff.expo, RETRYABLE,
            max_tries=self.config.max_attempts,
            max_time=self.config.backoff_max_time,
            logger=log)(self._complete_once)

    def close(self):
        if self.__own_dispatcher:
            self.dispatcher.close()

    def __enter__(self):
        return self

    def __exit__(self, A, B, C):
        self.close()

    def __call__(self, request):
        return self.dispatcher(self.arequest, request)

    def batch(self, requests):
        return self.dispatcher.gather(
            [(self.arequest, (request,)) for request in requests])

    async def _pace(self):
        rate = self.config.requests_per_minute
        if rate is None:
            return
        if self.__pace_lock is None:
            self.__pace_lock = asyncio.Lock()
        async with self.__pace_lock:
            now = time.monotonic()
            wait = self.__next_slot - now
            self.__next_slot = max(now, self.__next_slot) + 60.0 / rate
        if wait > 0:
            await asyncio.sleep(wait)

    async def _complete_once(self, prompt):
        await self._pace()
        arguments = dict(
            model=self.config.model,
            messages=[{'role': 'user', 'content': prompt}],
            max_completion_tokens=self.config.max_output_tokens)
        if self.config.temperature is not None:
            arguments['temperature'] = self.config.temperature
        if self.config.reasoning_effort is not None:
            arguments['reasoning_effort'] = self.config.reasoning_effort
        return await self.client.chat.completions.create(**arguments)

    async def arequest(self, request):
        if self.__in_flight is None:
            self.__in_flight = asyncio.Semaphore(self.config.max_in_flight)
        prompt = prompts.render_prompt(
            request.variant, request.kind, request.n, request.anchor_state,
            request.prompt_extra())

        async with self.__in_flight:
            start = time.monotonic()
            try:
                completion = await self.__complete(prompt)
            except openai.RateLimitError as error:
                raise RateLimited(
                    'Rate limited after %d attempts: %s' % (
                        self.config.max_attempts, error)) from error
            except openai.OpenAIError as error:
                raise EndpointError(
                    'Request to %s failed: %s' % (
                        self.config.model, error)) from error
            latency = time.monotonic() - start

        text = completion.choices[0].message.content or ''
        usage = getattr(completion, 'usage', None)
        steps, status = listing.parse_solution_text(
            text, request.kind, request.expectation)
        log.debug(
            'Step %d %s reply: %s, %d steps in %.1fs',
            request.anchor_index, request.variant, status, len(steps),
            latency)
        return RolloutResponse(
            tuple(steps), text, status,
            Usage(
                calls=1,
                prompt_tokens=getattr(usage, 'prompt_tokens', 0) or 0,
                completion_tokens=getattr(usage, 'completion_tokens', 0)
                or 0),
            latency)
