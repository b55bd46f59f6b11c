'''Checkers Jumping: n red and n blue checkers on a line of 2n+1 cells.

Red moves right and blue moves left, either sliding into the adjacent empty
cell or jumping over a single checker of the other colour.  The goal mirrors
the initial board.  The move generator, the complete-block scan and the
losing-pattern checks all look only at the cells around the empty cell, so
they also work on claimed boards which have lost or gained a checker.
'''

from typing import List, NamedTuple, Optional, Tuple

from .errors import InvalidMove, MalformedState, NoOptimalMove
from .step import Step


RED = 'R'
BLUE = 'B'
EMPTY = '_'
CELLS = (RED, BLUE, EMPTY)

Board = Tuple[str, ...]


class CheckersMove(NamedTuple):
    color: str
    from_pos: int
    to_pos: int


class LosingPattern(NamedTuple):
    kind: str               # 'P1', 'P2' or 'P3'
    position: int           # index of the empty cell the pattern is built on


def _check_size(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError('Piece count must be a positive integer, not %r' % n)


def initial(n) -> Board:
    _check_size(n)
    return (RED,) * n + (EMPTY,) + (BLUE,) * n


def goal(n) -> Board:
    _check_size(n)
    return (BLUE,) * n + (EMPTY,) + (RED,) * n


def size(board):
    '''Returns n for a well formed board, None otherwise.'''
    if len(board) % 2 == 0:
        return None
    n = len(board) // 2
    if n < 1 or board.count(RED) != n or board.count(BLUE) != n \
            or board.count(EMPTY) != 1:
        return None
    return n


def validate(board, n=None):
    '''Raises MalformedState unless board is a well formed board, for the
    given n if one is specified.'''
    if any(cell not in CELLS for cell in board):
        raise MalformedState('Unknown cell in board %r' % (board,))
    found = size(board)
    if found is None:
        raise MalformedState(
            'Board %r needs n red, n blue and one empty cell' % (board,))
    if n is not None and found != n:
        raise MalformedState(
            'Board has %d cells, expected %d' % (len(board), 2 * n + 1))
    return board


def is_goal(board):
    n = size(board)
    return n is not None and tuple(board) == goal(n)


def _empty_position(board):
    if board.count(EMPTY) != 1:
        raise MalformedState('Board %r needs one empty cell' % (board,))
    return board.index(EMPTY)


def valid_moves(board) -> List[CheckersMove]:
    '''All legal moves, in the fixed order: red slide, blue slide, red jump
    over blue, blue jump over red.  Every legal move lands in the empty cell
    so at most four exist.'''
    e = _empty_position(board)
    last = len(board) - 1
    moves = []
    if e > 0 and board[e - 1] == RED:
        moves.append(CheckersMove(RED, e - 1, e))
    if e < last and board[e + 1] == BLUE:
        moves.append(CheckersMove(BLUE, e + 1, e))
    if e > 1 and board[e - 2] == RED and board[e - 1] == BLUE:
        moves.append(CheckersMove(RED, e - 2, e))
    if e < last - 1 and board[e + 1] == RED and board[e + 2] == BLUE:
        moves.append(CheckersMove(BLUE, e + 2, e))
    return moves


def apply(board, move) -> Board:
    color, from_pos, to_pos = move
    if color not in (RED, BLUE):
        raise InvalidMove('Unknown checker colour %r' % (color,))
    if not (0 <= from_pos < len(board) and 0 <= to_pos < len(board)):
        raise InvalidMove('Move %r leaves the board' % (list(move),))
    if board[from_pos] != color:
        raise InvalidMove(
            'No %s checker at position %d' % (color, from_pos))
    if board[to_pos] != EMPTY:
        raise InvalidMove('Destination %d is occupied' % to_pos)
    step = to_pos - from_pos
    if (color == RED and step not in (1, 2)) or \
            (color == BLUE and step not in (-1, -2)):
        raise InvalidMove(
            '%s cannot move from %d to %d' % (color, from_pos, to_pos))
    if abs(step) == 2:
        jumped = board[(from_pos + to_pos) // 2]
        if jumped == color or jumped == EMPTY:
            raise InvalidMove(
                '%s may only jump over a checker of the other colour' % color)
    result = list(board)
    result[from_pos] = EMPTY
    result[to_pos] = color
    return tuple(result)


def complete_blocks(board):
    '''Returns (left_block_end, right_block_start): the last index of the
    blue run against the left edge (-1 if none) and the first index of the
    red run against the right edge (len(board) if none).'''
    left = 0
    while left < len(board) and board[left] == BLUE:
        left += 1
    right = len(board)
    while right > 0 and board[right - 1] == RED:
        right -= 1
    return left - 1, right


def is_losing(board) -> Optional[LosingPattern]:
    '''Checks for a losing pattern built on the empty cell, P1 then P2 then
    P3.  Checkers already in their complete block are exempt.'''
    e = _empty_position(board)
    left_end, right_start = complete_blocks(board)
    length = len(board)

    if e <= length - 3 and board[e + 1] == RED and board[e + 2] == RED \
            and not e + 2 >= right_start:
        return LosingPattern('P1', e)
    if e >= 2 and board[e - 2] == BLUE and board[e - 1] == BLUE \
            and not e - 2 <= left_end:
        return LosingPattern('P2', e)
    if 1 <= e <= length - 2 and board[e - 1] == BLUE \
            and board[e + 1] == RED \
            and not e - 1 <= left_end and not e + 1 >= right_start:
        return LosingPattern('P3', e)
    return None


def optimal_moves(board) -> List[CheckersMove]:
    '''The valid moves whose resulting board has no losing pattern, in move
    generation order.'''
    moves = [
        move for move in valid_moves(board)
        if is_losing(apply(board, move)) is None]
    if not moves and not is_goal(board):
        raise NoOptimalMove('No optimal move from %r' % (board,))
    return moves


def oracle_step(board) -> Step:
    '''Commits the first optimal move.'''
    move = optimal_moves(board)[0]
    return Step(move, apply(board, move))


def oracle_solve(n) -> List[Step]:
    board = initial(n)
    steps = []
    while not is_goal(board):
        step = oracle_step(board)
        steps.append(Step(step.move, step.state, len(steps) + 1))
        board = step.state
    return steps


def optimal_length(n):
    _check_size(n)
    return (n + 1) ** 2 - 1
