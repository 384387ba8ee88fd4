"""Recursive descent parser for the expression DSL.

Grammar (whitespace insensitive):

  expr   := term (("+"|"-") term)*
  term   := factor (("*"|"/") factor)*     division only by nonzero constants
  factor := atom ("^" integer)?
  atom   := number | coord | func "(" expr ")" | "(" expr ")" | "-" atom
  coord  := "x" positive-integer
  func   := "sin" | "cos" | "exp"

The parser builds nodes exactly as written (no flattening across
parentheses), so `parse(to_text(f))` evaluates identically to `f`.
"""

import dataclasses
import re

import numpy as np

from hadamard_tools import expr
from hadamard_tools import space


class ExpressionSyntaxError(ValueError):
  """A DSL error at a 1-based line and column."""

  def __init__(self, message: str, line: int, column: int):
    super().__init__(message)
    self.message = message
    self.line = line
    self.column = column

  def __str__(self) -> str:
    return f'line {self.line}, column {self.column}: {self.message}'


@dataclasses.dataclass
class Token:
  kind: str  # 'number', 'ident', 'op' or 'end'.
  text: str
  line: int
  column: int


_TOKEN_RE = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_COORD_RE = re.compile(r'x(\d+)')


def tokenize(text: str) -> list[Token]:
  tokens = []
  pos, line, line_start = 0, 1, 0
  while pos < len(text):
    matched = _TOKEN_RE.match(text, pos)
    if not matched:
      raise ExpressionSyntaxError(f'unexpected character {text[pos]!r}', line,
                                  pos - line_start + 1)
    kind = matched.lastgroup
    assert kind
    if kind == 'space':
      for i, char in enumerate(matched.group(), start=pos):
        if char == '\n':
          line, line_start = line + 1, i + 1
    else:
      tokens.append(Token(kind, matched.group(), line, pos - line_start + 1))
    pos = matched.end()
  tokens.append(Token('end', '', line, pos - line_start + 1))
  return tokens


class Parser:
  """Parses one DSL string into a SmoothExpr."""

  def __init__(self, text: str):
    self.tokens = tokenize(text)
    self.pos = 0

  @property
  def current(self) -> Token:
    return self.tokens[self.pos]

  def error(self, message: str, token: Token | None = None):
    token = token or self.current
    return ExpressionSyntaxError(message, token.line, token.column)

  def advance(self) -> Token:
    token = self.current
    if token.kind != 'end':
      self.pos += 1
    return token

  def accept(self, *ops: str) -> Token | None:
    if self.current.kind == 'op' and self.current.text in ops:
      return self.advance()
    return None

  def expect(self, op: str) -> Token:
    token = self.accept(op)
    if token is None:
      raise self.error(f'expected {op!r} but found {self._describe()}')
    return token

  def _describe(self) -> str:
    token = self.current
    return 'end of input' if token.kind == 'end' else repr(token.text)

  def parse(self) -> expr.SmoothExpr:
    node = self.parse_expr()
    if self.current.kind != 'end':
      raise self.error(f'unexpected {self._describe()}')
    return node

  def parse_expr(self) -> expr.SmoothExpr:
    terms = [self.parse_term()]
    while op := self.accept('+', '-'):
      term = self.parse_term()
      terms.append(term if op.text == '+' else _negate(term))
    return terms[0] if len(terms) == 1 else expr.Add(tuple(terms))

  def parse_term(self) -> expr.SmoothExpr:
    factors = [self.parse_factor()]
    while op := self.accept('*', '/'):
      start = self.current
      factor = self.parse_factor()
      if op.text == '*':
        factors.append(factor)
        continue
      if factor.support:
        raise self.error('division is only by nonzero constants', start)
      divisor = _constant_value(factor)
      if divisor == 0.0:
        raise self.error('division by zero', start)
      factors.append(expr.Const(1.0 / divisor))
    return factors[0] if len(factors) == 1 else expr.Mul(tuple(factors))

  def parse_factor(self) -> expr.SmoothExpr:
    base = self.parse_atom()
    if not self.accept('^'):
      return base
    token = self.current
    if token.kind == 'op' and token.text == '-':
      raise self.error('exponent must be a nonnegative integer')
    if token.kind != 'number' or not token.text.isdigit():
      raise self.error('non-integer exponent')
    self.advance()
    return expr.IntPow(base, int(token.text))

  def parse_atom(self) -> expr.SmoothExpr:
    token = self.current
    if token.kind == 'number':
      self.advance()
      value = float(token.text)
      if not np.isfinite(value):
        raise self.error(f'number out of range: {token.text}', token)
      return expr.Const(value)
    if token.kind == 'ident':
      self.advance()
      if matched := _COORD_RE.fullmatch(token.text):
        index = int(matched.group(1))
        if index < 1:
          raise self.error('coordinate indices start at x1', token)
        return expr.Coord(index)
      if token.text in expr.PRIMITIVES:
        self.expect('(')
        child = self.parse_expr()
        self.expect(')')
        return expr.Prim(token.text, child)
      raise self.error(f'unknown identifier {token.text!r}', token)
    if self.accept('('):
      node = self.parse_expr()
      self.expect(')')
      return node
    if self.accept('-'):
      return _negate(self.parse_atom())
    raise self.error(f'expected a number, coordinate, function or "(" but '
                     f'found {self._describe()}')


def _constant_value(node: expr.SmoothExpr) -> float:
  return float(node.evaluate_batch(np.zeros((1, 1)))[0])


def _negate(node: expr.SmoothExpr) -> expr.SmoothExpr:
  if isinstance(node, expr.Const):
    return expr.Const(-node.value)
  return expr.Scale(-1.0, node)


def parse(text: str) -> expr.SmoothExpr:
  try:
    return Parser(text).parse()
  except space.DomainError as e:
    # Node validation failures (e.g. overflowing constants) surface as DSL
    # errors at the end of the input.
    raise ExpressionSyntaxError(str(e), 1, len(text) + 1) from e
