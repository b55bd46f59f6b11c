'''Experiment configuration.

A configuration file is YAML with three sections: ``strategy`` (required),
``agent`` and ``plan``.  Unknown keys anywhere are rejected.  Presets
shipped with the package are loaded by name as ``preset:<name>``, for
instance ``preset:lead``.
'''

import os
from typing import Annotated, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .agents import MockAgent, MockErrorProfile, OracleAgent
from .endpoint import EndpointConfig, LlmAgent
from .errors import ConfigError
from .executors import StrategyConfig


PRESET_DIR = os.path.join(os.path.dirname(__file__), 'presets')
PRESET_PREFIX = 'preset:'

AGENT_KINDS = ('oracle', 'mock', 'endpoint')

PositiveInt = Annotated[int, Field(ge=1)]


class AgentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    kind: Literal['oracle', 'mock', 'endpoint'] = 'oracle'
    profile: MockErrorProfile = MockErrorProfile()
    endpoint: EndpointConfig = EndpointConfig()
    # Oracle only: cap on steps per open ended reply
    max_steps_per_reply: Optional[PositiveInt] = None

    def make_agent(self, episode=0, seed=0):
        '''A fresh agent for one episode of a run seeded with seed.'''
        if self.kind == 'oracle':
            return OracleAgent(self.max_steps_per_reply)
        if self.kind == 'mock':
            return MockAgent(self.profile, episode, seed)
        return LlmAgent(self.endpoint)


class ExperimentPlan(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    puzzle: Literal['checkers', 'hanoi'] = 'checkers'
    sizes: List[PositiveInt] = [3]
    episodes: PositiveInt = 50
    seed: Annotated[int, Field(ge=0)] = 0
    parallel: PositiveInt = 1
    out_dir: str = 'runs'
    # Store full prompt text in transcripts, not just template references
    include_prompts: bool = False
    profile_samples: PositiveInt = 50
    positional_samples: PositiveInt = 50
    self_distance_splits: PositiveInt = 10


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    strategy: StrategyConfig
    agent: AgentConfig = AgentConfig()
    plan: ExperimentPlan = ExperimentPlan()


def _problems(error):
    return [
        ('.'.join(str(part) for part in problem['loc']), problem['msg'])
        for problem in error.errors()]


def preset_path(name):
    path = os.path.join(PRESET_DIR, name + '.yaml')
    if not os.path.isfile(path):
        available = sorted(
            os.path.splitext(f)[0] for f in os.listdir(PRESET_DIR)
            if f.endswith('.yaml'))
        raise ConfigError(
            'No preset %r, choose from %s' % (name, ', '.join(available)))
    return path


def parse_config(data):
    '''Validates a configuration mapping, returning an ExperimentConfig.'''
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError('Configuration must be a mapping, not %s' % (
            type(data).__name__))
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as error:
        raise ConfigError(_problems(error)) from error


def read_config(path):
    '''Loads a configuration file or preset into an ExperimentConfig.'''
    if path.startswith(PRESET_PREFIX):
        path = preset_path(path[len(PRESET_PREFIX):])
    try:
        with open(path, encoding='utf-8') as config_file:
            data = yaml.safe_load(config_file)
    except OSError as error:
        raise ConfigError([('', 'Cannot read %s: %s' % (
            path, error.strerror))]) from error
    except yaml.YAMLError as error:
        raise ConfigError([('', 'Bad YAML in %s: %s' % (
            path, error))]) from error
    return parse_config(data)


def load_config(path):
    '''Returns (StrategyConfig, AgentConfig, ExperimentPlan) from a file or
    ``preset:<name>``.  Raises ConfigError listing every bad field.'''
    config = read_config(path)
    return config.strategy, config.agent, config.plan


def apply_overrides(
        config, seed=None, out_dir=None, parallel=None, agent=None):
    '''Command line flags take precedence over the file.'''
    plan = {}
    if seed is not None:
        plan['seed'] = seed
    if out_dir is not None:
        plan['out_dir'] = out_dir
    if parallel is not None:
        plan['parallel'] = parallel
    data = config.model_dump()
    data['plan'].update(plan)
    if agent is not None:
        data['agent']['kind'] = agent
    return parse_config(data)
