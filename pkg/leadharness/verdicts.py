# Classification of one committed step
OK = 'ok'
MOVE_FINDING = 'move_finding'
MOVE_EXECUTION = 'move_execution'
PARSE = 'parse'

ERROR_TYPES = (MOVE_FINDING, MOVE_EXECUTION, PARSE)

# Episode outcomes
SUCCESS = 'success'
FAILURE = 'failure'

# Reasons recorded alongside a failure
BUDGET_EXCEEDED = 'budget_exceeded'
NO_PROGRESS = 'no_progress'
GOAL_NOT_REACHED = 'goal_not_reached'
INVALID_STEP = 'invalid_step'
EXHAUSTED = 'exhausted'
MALFORMED_REPLY = 'malformed_reply'

# Phases of a transcript entry
BASE_VOTE = 'base_vote'
LOOKAHEAD_VOTE = 'lookahead_vote'
COMMIT = 'commit'
RESTART_ROUND = 'restart_round'
SINGLE_SHOT = 'single_shot'
PHASES = (BASE_VOTE, LOOKAHEAD_VOTE, COMMIT, RESTART_ROUND, SINGLE_SHOT)
