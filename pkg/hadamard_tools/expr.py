"""Smooth functionals f: H -> R that depend on finitely many coordinates.

A SmoothExpr is an immutable expression tree over the coordinates
x_k = <x, u_k>. The node kinds are closed under partial differentiation, so
every mixed partial of a tree is again a tree and every Hadamard factor built
from one is a concrete, smooth evaluator.

Trees evaluate on batches of points: `evaluate_batch(points)` takes an
(N, D) array whose rows are points and returns N values, reading coordinates
beyond D as 0.
"""

import dataclasses
import functools
import itertools
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from hadamard_tools import space
from hadamard_tools.space import HVector

Support = tuple[int, ...]
"""Sorted coordinate indices a tree depends on."""

PRIMITIVES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'sin': np.sin,
    'cos': np.cos,
    'exp': np.exp,
}

_SCALAR_PRIMITIVES: dict[str, Callable[[float], float]] = {
    'sin': math.sin,
    'cos': math.cos,
    'exp': math.exp,
}


class SmoothExpr:
  """Base class of the expression nodes."""

  @property
  def children(self) -> tuple['SmoothExpr', ...]:
    return ()

  @functools.cached_property
  def support(self) -> Support:
    indices: set[int] = set()
    for child in self.children:
      indices.update(child.support)
    return tuple(sorted(indices))

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    raise NotImplementedError

  def _derive(self, k: int) -> 'SmoothExpr':
    raise NotImplementedError

  def _text(self) -> str:
    raise NotImplementedError

  def __str__(self) -> str:
    return self._text()

  def __add__(self, other: 'SmoothExpr | float') -> 'SmoothExpr':
    return add(self, _coerce(other))

  def __radd__(self, other: float) -> 'SmoothExpr':
    return add(_coerce(other), self)

  def __sub__(self, other: 'SmoothExpr | float') -> 'SmoothExpr':
    return add(self, scale(-1.0, _coerce(other)))

  def __rsub__(self, other: float) -> 'SmoothExpr':
    return add(_coerce(other), scale(-1.0, self))

  def __mul__(self, other: 'SmoothExpr | float') -> 'SmoothExpr':
    if isinstance(other, SmoothExpr):
      return mul(self, other)
    return scale(float(other), self)

  def __rmul__(self, other: float) -> 'SmoothExpr':
    return scale(float(other), self)

  def __truediv__(self, other: float) -> 'SmoothExpr':
    if isinstance(other, SmoothExpr) or other == 0:
      raise space.DomainError('Division is only by nonzero constants.')
    return scale(1.0 / float(other), self)

  def __neg__(self) -> 'SmoothExpr':
    return scale(-1.0, self)

  def __pow__(self, exponent: int) -> 'SmoothExpr':
    return power(self, exponent)


@dataclasses.dataclass(frozen=True)
class Const(SmoothExpr):
  value: float

  def __post_init__(self):
    value = float(self.value)
    if not math.isfinite(value):
      raise space.DomainError(f'Constants must be finite, got {value}.')
    object.__setattr__(self, 'value', value)

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    return np.full(points.shape[0], self.value)

  def _derive(self, k: int) -> SmoothExpr:
    return ZERO

  def _text(self) -> str:
    text = repr(self.value)
    return f'({text})' if text.startswith('-') else text


@dataclasses.dataclass(frozen=True)
class Coord(SmoothExpr):
  """The coordinate functional x_k = <x, u_k>, k >= 1."""

  index: int

  def __post_init__(self):
    if int(self.index) != self.index or self.index < 1:
      raise space.DomainError(
          f'Coordinate indices are positive integers, got {self.index}.')

  @functools.cached_property
  def support(self) -> Support:
    return (self.index,)

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    if self.index <= points.shape[1]:
      return np.array(points[:, self.index - 1], dtype=float)
    return np.zeros(points.shape[0])

  def _derive(self, k: int) -> SmoothExpr:
    return ONE if k == self.index else ZERO

  def _text(self) -> str:
    return f'x{self.index}'


@dataclasses.dataclass(frozen=True)
class Add(SmoothExpr):
  terms: tuple[SmoothExpr, ...]

  def __post_init__(self):
    if not self.terms:
      raise space.DomainError('Add needs at least one term.')

  @property
  def children(self) -> tuple[SmoothExpr, ...]:
    return self.terms

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    total = self.terms[0].evaluate_batch(points)
    for term in self.terms[1:]:
      total = total + term.evaluate_batch(points)
    return total

  def _derive(self, k: int) -> SmoothExpr:
    return add(*(partial(term, k) for term in self.terms))

  def _text(self) -> str:
    return ' + '.join(
        _wrap(term, (Add,)) for term in self.terms)


@dataclasses.dataclass(frozen=True)
class Mul(SmoothExpr):
  factors: tuple[SmoothExpr, ...]

  def __post_init__(self):
    if not self.factors:
      raise space.DomainError('Mul needs at least one factor.')

  @property
  def children(self) -> tuple[SmoothExpr, ...]:
    return self.factors

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    product = self.factors[0].evaluate_batch(points)
    for factor in self.factors[1:]:
      product = product * factor.evaluate_batch(points)
    return product

  def _derive(self, k: int) -> SmoothExpr:
    # Product rule: one term per factor that depends on x_k.
    terms = []
    for i, factor in enumerate(self.factors):
      if k not in factor.support:
        continue
      rest = self.factors[:i] + (partial(factor, k),) + self.factors[i + 1:]
      terms.append(mul(*rest))
    return add(*terms)

  def _text(self) -> str:
    return ' * '.join(
        _wrap(factor, (Add, Mul, Scale)) for factor in self.factors)


@dataclasses.dataclass(frozen=True)
class Scale(SmoothExpr):
  factor: float
  child: SmoothExpr

  def __post_init__(self):
    factor = float(self.factor)
    if not math.isfinite(factor):
      raise space.DomainError(f'Scale factors must be finite, got {factor}.')
    object.__setattr__(self, 'factor', factor)

  @property
  def children(self) -> tuple[SmoothExpr, ...]:
    return (self.child,)

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    return self.factor * self.child.evaluate_batch(points)

  def _derive(self, k: int) -> SmoothExpr:
    return scale(self.factor, partial(self.child, k))

  def _text(self) -> str:
    return (f'{Const(self.factor)._text()} * '
            f'{_wrap(self.child, (Add, Mul, Scale))}')


@dataclasses.dataclass(frozen=True)
class IntPow(SmoothExpr):
  child: SmoothExpr
  exponent: int

  def __post_init__(self):
    if int(self.exponent) != self.exponent or self.exponent < 0:
      raise space.DomainError(
          f'Exponents are nonnegative integers, got {self.exponent}.')
    object.__setattr__(self, 'exponent', int(self.exponent))

  @property
  def children(self) -> tuple[SmoothExpr, ...]:
    return (self.child,)

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    return np.power(self.child.evaluate_batch(points), self.exponent)

  def _derive(self, k: int) -> SmoothExpr:
    if self.exponent == 0:
      return ZERO
    return scale(
        float(self.exponent),
        mul(power(self.child, self.exponent - 1), partial(self.child, k)))

  def _text(self) -> str:
    base = self.child._text()
    if not (isinstance(self.child, (Coord, Prim)) or
            (isinstance(self.child, Const) and not base.startswith('('))):
      base = f'({base})'
    return f'{base}^{self.exponent}'


@dataclasses.dataclass(frozen=True)
class Prim(SmoothExpr):
  name: str
  child: SmoothExpr

  def __post_init__(self):
    if self.name not in PRIMITIVES:
      raise space.DomainError(f'Unknown primitive: {self.name!r}')

  @property
  def children(self) -> tuple[SmoothExpr, ...]:
    return (self.child,)

  def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
    return PRIMITIVES[self.name](self.child.evaluate_batch(points))

  def _derive(self, k: int) -> SmoothExpr:
    inner_derivative = partial(self.child, k)
    if self.name == 'sin':
      return mul(prim('cos', self.child), inner_derivative)
    if self.name == 'cos':
      return scale(-1.0, mul(prim('sin', self.child), inner_derivative))
    return mul(prim('exp', self.child), inner_derivative)

  def _text(self) -> str:
    return f'{self.name}({self.child._text()})'


ZERO = Const(0.0)
ONE = Const(1.0)


def _coerce(value: SmoothExpr | float) -> SmoothExpr:
  return value if isinstance(value, SmoothExpr) else Const(value)


def _wrap(node: SmoothExpr, kinds: tuple[type, ...]) -> str:
  text = node._text()
  return f'({text})' if isinstance(node, kinds) else text


def _fold(func: Callable[[], float]) -> Const | None:
  """Folds a constant subexpression unless it overflows."""
  try:
    value = func()
  except OverflowError:
    return None
  return Const(value) if math.isfinite(value) else None


# Smart constructors. They fold constants and drop zero and unit terms, and
# nothing more: trees are compared by evaluation, not by normal form.


def add(*terms: SmoothExpr) -> SmoothExpr:
  flat: list[SmoothExpr] = []
  constants: list[Const] = []
  for term in terms:
    for t in (term.terms if isinstance(term, Add) else (term,)):
      if isinstance(t, Const):
        constants.append(t)
      else:
        flat.append(t)
  constant = sum(c.value for c in constants)
  if not math.isfinite(constant):
    flat.extend(constants)
  elif constant != 0.0:
    flat.append(Const(constant))
  if not flat:
    return ZERO
  return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*factors: SmoothExpr) -> SmoothExpr:
  flat: list[SmoothExpr] = []
  stripped: list[SmoothExpr] = []
  constant = 1.0
  for factor in factors:
    for f in (factor.factors if isinstance(factor, Mul) else (factor,)):
      flat.append(f)
      if isinstance(f, Const):
        constant *= f.value
      elif isinstance(f, Scale):
        constant *= f.factor
        stripped.append(f.child)
      else:
        stripped.append(f)
  if any(isinstance(f, Const) and f.value == 0.0 for f in flat):
    return ZERO
  if not math.isfinite(constant) or constant == 0.0:
    # The folded factor over- or underflows; the factors as given need not.
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))
  if not stripped:
    return Const(constant)
  body = stripped[0] if len(stripped) == 1 else Mul(tuple(stripped))
  return scale(constant, body)


def scale(factor: float, child: SmoothExpr) -> SmoothExpr:
  if factor == 0.0:
    return ZERO
  if factor == 1.0:
    return child
  if isinstance(child, Const):
    return _fold(lambda: factor * child.value) or Scale(factor, child)
  if isinstance(child, Scale) and math.isfinite(factor * child.factor):
    return scale(factor * child.factor, child.child)
  return Scale(factor, child)


def power(child: SmoothExpr, exponent: int) -> SmoothExpr:
  if exponent == 0:
    return ONE
  if exponent == 1:
    return child
  if isinstance(child, Const):
    return _fold(lambda: child.value**exponent) or IntPow(child, exponent)
  return IntPow(child, exponent)


def prim(name: str, child: SmoothExpr) -> SmoothExpr:
  if isinstance(child, Const) and name in _SCALAR_PRIMITIVES:
    folded = _fold(lambda: _SCALAR_PRIMITIVES[name](child.value))
    if folded is not None:
      return folded
  return Prim(name, child)


def support(f: SmoothExpr) -> Support:
  return f.support


def to_text(f: SmoothExpr) -> str:
  """Prints `f` in the expression DSL; `parser.parse` reads it back."""
  return f._text()


def evaluate(f: SmoothExpr, x: HVector) -> float:
  return float(f.evaluate_batch(x.coeffs[np.newaxis, :])[0])


def partial(f: SmoothExpr, k: int) -> SmoothExpr:
  """Returns the symbolic partial derivative of `f` along x_k."""
  if k not in f.support:
    return ZERO
  return f._derive(k)


@functools.lru_cache(maxsize=8192)
def _mixed_partial(f: SmoothExpr, indices: tuple[int, ...]) -> SmoothExpr:
  if not indices:
    return f
  return partial(_mixed_partial(f, indices[:-1]), indices[-1])


def mixed_partial(f: SmoothExpr, indices: Sequence[int]) -> SmoothExpr:
  """Returns the mixed partial along all `indices`, memoized.

  Mixed partials of a smooth function commute, so the indices are sorted
  before the lookup.
  """
  return _mixed_partial(f, tuple(sorted(indices)))


def gradient(f: SmoothExpr, x: HVector) -> HVector:
  dim = max([x.dim, *f.support])
  coeffs = np.zeros(dim)
  for k in f.support:
    coeffs[k - 1] = evaluate(partial(f, k), x)
  return HVector(coeffs)


def directional_derivative(f: SmoothExpr, x: HVector, v: HVector) -> float:
  return space.inner(gradient(f, x), v)


def nth_directional(f: SmoothExpr, x: HVector,
                    dirs: Sequence[HVector]) -> float:
  """Returns the n-th derivative tensor of `f` at `x` applied to `dirs`."""
  if not dirs:
    raise space.DomainError('nth_directional needs at least one direction.')
  slots = [[k for k in f.support if d.coord(k) != 0.0] for d in dirs]
  values: dict[tuple[int, ...], float] = {}
  total = 0.0
  for indices in itertools.product(*slots):
    key = tuple(sorted(indices))
    if key not in values:
      values[key] = evaluate(mixed_partial(f, key), x)
    weight = math.prod(d.coord(k) for d, k in zip(dirs, indices))
    total += values[key] * weight
  return total


def substitute(f: SmoothExpr, mapping: Mapping[int, SmoothExpr]) -> SmoothExpr:
  """Replaces every x_k in `f` by `mapping[k]` (when present)."""
  if isinstance(f, Coord):
    return mapping.get(f.index, f)
  if isinstance(f, Const):
    return f
  if isinstance(f, Add):
    return add(*(substitute(t, mapping) for t in f.terms))
  if isinstance(f, Mul):
    return mul(*(substitute(t, mapping) for t in f.factors))
  if isinstance(f, Scale):
    return scale(f.factor, substitute(f.child, mapping))
  if isinstance(f, IntPow):
    return power(substitute(f.child, mapping), f.exponent)
  if isinstance(f, Prim):
    return prim(f.name, substitute(f.child, mapping))
  raise TypeError(f'Unknown expression node: {type(f).__name__}')


def linear(coefficients: Sequence[float], offset: float = 0.0) -> SmoothExpr:
  """Returns offset + sum_k coefficients[k - 1] x_k."""
  return add(*(scale(float(c), Coord(k))
               for k, c in enumerate(coefficients, start=1) if c != 0.0),
             Const(offset))
