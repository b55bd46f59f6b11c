'''Records produced by an episode: the episode record itself and the
transcript entries describing each agent exchange and commit.'''

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import puzzle, verdicts
from .agents import Usage
from .step import Step


@dataclass
class TranscriptEntry:
    '''One line of a transcript.  Exchange entries (votes, restart rounds,
    single shot calls) carry the prompt and the agent's reply; commit
    entries carry the committed step and, once graded, its verdict.'''
    episode: int
    step_index: int
    phase: str
    anchor_index: Optional[int] = None
    prompt: Optional[Dict[str, Any]] = None
    raw_text: Optional[str] = None
    steps: List[Step] = field(default_factory=list)
    classification: Optional[str] = None
    latency: float = 0.0
    usage: Usage = field(default_factory=Usage)
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_json(self):
        return {
            'episode': self.episode,
            'step_index': self.step_index,
            'phase': self.phase,
            'anchor_index': self.anchor_index,
            'prompt': self.prompt,
            'raw_text': self.raw_text,
            'steps': [step.to_json() for step in self.steps],
            'classification': self.classification,
            'latency': self.latency,
            'usage': self.usage.to_json(),
            'detail': self.detail,
        }

    @classmethod
    def from_json(cls, record, kind=None):
        return cls(
            episode=record['episode'],
            step_index=record['step_index'],
            phase=record['phase'],
            anchor_index=record.get('anchor_index'),
            prompt=record.get('prompt'),
            raw_text=record.get('raw_text'),
            steps=[
                puzzle.step_from_json(kind, step)
                for step in record.get('steps', [])],
            classification=record.get('classification'),
            latency=record.get('latency', 0.0),
            usage=Usage(**record.get('usage', {})),
            detail=record.get('detail', {}))


@dataclass
class EpisodeRecord:
    '''Everything one episode produced.  Executors fill in the committed
    steps and exchanges; `leadharness.grading.grade_episode` fills in the
    verdicts.  Step indices are 0-based.'''
    strategy: str
    kind: str
    n: int
    episode: int = 0
    config: Dict[str, Any] = field(default_factory=dict)
    step_budget: int = 0
    steps: List[Step] = field(default_factory=list)
    # Per committed step: how it was decided (tally, unanimity, calls)
    decisions: List[Dict[str, Any]] = field(default_factory=list)
    entries: List[TranscriptEntry] = field(default_factory=list)
    usage: Usage = field(default_factory=Usage)
    rounds: int = 0
    # Set by the executor when it gives up before committing step halt_index
    halt_index: Optional[int] = None
    halt_reason: Optional[str] = None
    budget_exceeded: bool = False
    # Set by grading
    outcome: Optional[str] = None
    first_error_index: Optional[int] = None
    failure_reason: Optional[str] = None
    error_types: Dict[int, str] = field(default_factory=dict)

    @property
    def calls(self):
        return self.usage.calls

    @property
    def success(self):
        return self.outcome == verdicts.SUCCESS

    def commit_entries(self):
        return [
            entry for entry in self.entries
            if entry.phase == verdicts.COMMIT]

    def header(self):
        '''The fields a transcript needs to rebuild this record.'''
        return {
            'strategy': self.strategy,
            'kind': self.kind,
            'n': self.n,
            'episode': self.episode,
            'config': self.config,
            'step_budget': self.step_budget,
            'rounds': self.rounds,
            'halt_index': self.halt_index,
            'halt_reason': self.halt_reason,
            'budget_exceeded': self.budget_exceeded,
        }

    def summary(self):
        return {
            'outcome': self.outcome,
            'first_error_index': self.first_error_index,
            'failure_reason': self.failure_reason,
            'error_types': {
                str(index): error for index, error in
                sorted(self.error_types.items())},
            'committed': len(self.steps),
            'usage': self.usage.to_json(),
        }
