'''Harness for stepwise solving of Tower of Hanoi and Checkers Jumping.'''

from ._version_git import __version__

__all__ = ['__version__']
