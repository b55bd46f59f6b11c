'''Exceptions raised by the harness.

Everything derives from `HarnessError` so the command line can map any of
them onto an exit code without catching unrelated failures.'''


class HarnessError(Exception):
    pass


class InvalidMove(HarnessError, ValueError):
    '''A move breaks the puzzle rules for the state it is applied to.'''


class MalformedState(HarnessError, ValueError):
    '''A state does not satisfy its puzzle's invariants.'''


class NoOptimalMove(HarnessError):
    '''A non-goal checkers board has no move avoiding every losing pattern.
    Along the oracle strategy this never happens, so it signals a corrupt or
    unreachable board.'''


class OffTrajectory(HarnessError):
    '''The oracle agent was asked to continue from a state that is not on
    the oracle trajectory.'''


class UnsupportedVariant(HarnessError, ValueError):
    pass


class EndpointError(HarnessError):
    '''The remote endpoint could not be reached after all retries.'''


class RateLimited(EndpointError):
    pass


class Exhausted(HarnessError):
    '''Every sample drawn for a vote was malformed.'''


class NoErrors(HarnessError, ValueError):
    '''An error distribution was requested but no errors were observed.'''


class ConfigError(HarnessError):
    def __init__(self, problems):
        # problems is a list of (field path, message) pairs
        if isinstance(problems, str):
            problems = [('', problems)]
        self.problems = list(problems)
        super().__init__('; '.join(
            '%s: %s' % (field, message) if field else message
            for field, message in self.problems))


class TranscriptError(HarnessError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super().__init__(message)


class IncompleteTranscript(TranscriptError):
    pass
