import unittest

import numpy as np
from parameterized import parameterized

from hadamard_tools import expr
from hadamard_tools import parser
from hadamard_tools.space import HVector

ROUND_TRIP_CORPUS = [
    '3',
    '-2.5',
    '1e-5 * x1',
    'x1',
    'x12 + x3',
    'x1^2 + sin(x2)*x3',
    'x1 - x2 - x3',
    '-(x1 + x2)',
    '-x1^2',
    '(-x1)^3 + x2^0',
    'x1 / 3 + x2 / -4',
    'x1 * x2 / (2 + 3)',
    '2 * (x1 + 1) * (x2 - 1)',
    'sin(x1) * cos(x2) * exp(x3)',
    'exp(sin(cos(x1)))',
    'exp(-0.125 * x3^2)',
    '(x1 - 2*x2)^4 / 3',
    'x1 * x2 * (1 + x3^2)',
    'x1 * (x1 - 1)',
    '.5 * x1 + 3. * x2 + 2E+2',
    '((x1))',
    'cos(x1)^2 + sin(x1)^2 - 1',
    'x1*x2*x3*x4*x5*x6*x7*x8',
    '1.5e300 * x1 - 7',
]

MALFORMED = [
    # text, line, column, message fragment
    ('x(', 1, 1, "unknown identifier 'x'"),
    ('x1 +', 1, 5, 'found end of input'),
    ('x1^(1/2)', 1, 4, 'non-integer exponent'),
    ('x1^2.5', 1, 4, 'non-integer exponent'),
    ('x1^-1', 1, 4, 'nonnegative integer'),
    ('tan(x1)', 1, 1, "unknown identifier 'tan'"),
    ('x0 + 1', 1, 1, 'x1'),
    ('x1 / x2', 1, 6, 'nonzero constants'),
    ('x1 / (2 - 2)', 1, 6, 'division by zero'),
    ('sin x1', 1, 5, "expected '('"),
    ('x1 +\n  2 $ 3', 2, 5, 'unexpected character'),
    ('(x1 + x2', 1, 9, "expected ')'"),
    ('x1 x2', 1, 4, "unexpected 'x2'"),
    ('1e999 * x1', 1, 1, 'out of range'),
]


def _sample(count: int = 10) -> list[HVector]:
  rng = np.random.default_rng(17)
  return [HVector(rng.uniform(-2, 2, 12)) for _ in range(count)]


class ParseTest(unittest.TestCase):

  def test_grammar_forced_tree(self):
    self.assertEqual(
        parser.parse('x1^2 + sin(x2)*x3'),
        expr.Add((expr.IntPow(expr.Coord(1), 2),
                  expr.Mul((expr.Prim('sin', expr.Coord(2)), expr.Coord(3))))))
    self.assertEqual(parser.parse('3'), expr.Const(3.0))

  def test_unary_minus_binds_tighter_than_power(self):
    f = parser.parse('-x1^2')
    self.assertEqual(expr.evaluate(f, HVector([3.0])), 9.0)

  def test_whitespace_insensitive(self):
    self.assertEqual(
        parser.parse(' x1 ^ 2\n+\tsin( x2 ) '), parser.parse('x1^2+sin(x2)'))

  def test_division_by_constant(self):
    f = parser.parse('x1 / 4')
    self.assertEqual(expr.evaluate(f, HVector([2.0])), 0.5)

  @parameterized.expand([(text,) for text in ROUND_TRIP_CORPUS])
  def test_round_trip(self, text):
    f = parser.parse(text)
    printed = expr.to_text(f)
    g = parser.parse(printed)
    self.assertEqual(expr.to_text(g), printed)
    for x in _sample():
      self.assertEqual(expr.evaluate(g, x), expr.evaluate(f, x))

  def test_printed_derivatives_round_trip(self):
    for text in ROUND_TRIP_CORPUS:
      f = parser.parse(text)
      for k in f.support[:2]:
        df = expr.partial(f, k)
        g = parser.parse(expr.to_text(df))
        for x in _sample(3):
          self.assertEqual(expr.evaluate(g, x), expr.evaluate(df, x))

  @parameterized.expand(MALFORMED)
  def test_malformed(self, text, line, column, fragment):
    with self.assertRaises(parser.ExpressionSyntaxError) as raised:
      parser.parse(text)
    self.assertEqual((raised.exception.line, raised.exception.column),
                     (line, column))
    self.assertIn(fragment, str(raised.exception))
    self.assertTrue(str(raised.exception).startswith(f'line {line}, column'))


if __name__ == '__main__':
  unittest.main()
