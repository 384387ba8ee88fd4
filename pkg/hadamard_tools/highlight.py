import builtins
import sys
from typing import IO

_CYAN = '\033[1;36m'
_GREEN = '\033[1;32m'
_RED = '\033[1;31m'
_RESET = '\033[m'


def _emit(color: str, args, stream: IO[str] | None) -> None:
  stream = stream or sys.stderr
  colored = stream.isatty() if hasattr(stream, 'isatty') else False
  if colored:
    builtins.print(color, end='', file=stream)
  builtins.print(*args, end='', file=stream)
  builtins.print(_RESET if colored else '', file=stream)


def print(*args, stream: IO[str] | None = None) -> None:
  """Prints the arguments in cyan to stderr."""
  _emit(_CYAN, args, stream)


def ok(*args, stream: IO[str] | None = None) -> None:
  """Prints the arguments in green to stderr."""
  _emit(_GREEN, args, stream)


def warn(*args, stream: IO[str] | None = None) -> None:
  """Prints the arguments in red to stderr."""
  _emit(_RED, args, stream)
