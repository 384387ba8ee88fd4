"""Dual numbers R[eps] and H[eps] with eps^2 = 0.

Evaluating a smooth expression at x + eps*y under truncated first-order
arithmetic gives f(x) + eps*<grad f(x), y>: the eps^2 term is never formed,
so no higher-order data is carried.
"""

import dataclasses
import functools
from typing import Any

import numpy as np

from hadamard_tools import expr
from hadamard_tools.space import HVector


class DualArithmeticError(ArithmeticError):
  pass


@dataclasses.dataclass(frozen=True)
class DualScalar:
  """The dual number re + eps * eps_part."""

  re: float
  eps: float = 0.0

  def __post_init__(self):
    object.__setattr__(self, 're', float(self.re))
    object.__setattr__(self, 'eps', float(self.eps))

  def __add__(self, other: 'DualScalar') -> 'DualScalar':
    return dual_add(self, other)

  def __sub__(self, other: 'DualScalar') -> 'DualScalar':
    return dual_sub(self, other)

  def __mul__(self, other: 'DualScalar') -> 'DualScalar':
    return dual_mul(self, other)

  def __truediv__(self, other: 'DualScalar') -> 'DualScalar':
    return dual_div(self, other)

  def __neg__(self) -> 'DualScalar':
    return dual_neg(self)

  def __repr__(self) -> str:
    return f'{self.re} + {self.eps}ε'

  def to_json(self) -> dict[str, float]:
    return {'re': self.re, 'eps': self.eps}

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'DualScalar':
    return cls(float(data['re']), float(data['eps']))


EPSILON = DualScalar(0.0, 1.0)
"""The infinitesimal itself: nonzero, yet EPSILON * EPSILON == 0."""


@dataclasses.dataclass(frozen=True)
class DualVector:
  """The element point + eps * tangent of H[eps]."""

  point: HVector
  tangent: HVector

  def coord(self, k: int) -> DualScalar:
    return DualScalar(self.point.coord(k), self.tangent.coord(k))

  def to_json(self) -> dict[str, list[float]]:
    return {'point': self.point.to_json(), 'tangent': self.tangent.to_json()}

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'DualVector':
    return cls(HVector.from_json(data['point']),
               HVector.from_json(data['tangent']))


def dual_add(p: DualScalar, q: DualScalar) -> DualScalar:
  return DualScalar(p.re + q.re, p.eps + q.eps)


def dual_sub(p: DualScalar, q: DualScalar) -> DualScalar:
  return DualScalar(p.re - q.re, p.eps - q.eps)


def dual_neg(p: DualScalar) -> DualScalar:
  return DualScalar(-p.re, -p.eps)


def dual_scale(c: float, p: DualScalar) -> DualScalar:
  return DualScalar(c * p.re, c * p.eps)


def dual_mul(p: DualScalar, q: DualScalar) -> DualScalar:
  # (a + eps b)(c + eps d) = ac + eps (ad + bc); the eps^2 bd term is dropped.
  return DualScalar(p.re * q.re, p.re * q.eps + p.eps * q.re)


def dual_inverse(p: DualScalar) -> DualScalar:
  """Returns 1 / (a + eps b) = 1/a - eps b/a^2; needs a != 0."""
  if p.re == 0.0:
    raise DualArithmeticError(
        f'{p!r} has zero standard part and is not invertible in R[ε].')
  inv = 1.0 / p.re
  return DualScalar(inv, -p.eps * inv * inv)


def dual_div(p: DualScalar, q: DualScalar) -> DualScalar:
  return dual_mul(p, dual_inverse(q))


def dual_pow(p: DualScalar, exponent: int) -> DualScalar:
  """Returns a^n + eps * n a^(n-1) b; overflow saturates to inf."""
  if exponent == 0:
    return DualScalar(1.0, 0.0)
  base = np.float64(p.re)
  with np.errstate(over='ignore'):
    re = base**exponent
    slope = exponent * base**(exponent - 1)
  return DualScalar(re, slope * p.eps if p.eps else 0.0)


_DERIVATIVES = {
    'sin': (np.sin, np.cos),
    'cos': (np.cos, lambda a: -np.sin(a)),
    'exp': (np.exp, np.exp),
}


def dual_prim(name: str, p: DualScalar) -> DualScalar:
  """Returns prim(a) + eps * b * prim'(a); overflow saturates to inf."""
  if name not in _DERIVATIVES:
    raise DualArithmeticError(f'Unknown primitive: {name!r}')
  func, derivative = _DERIVATIVES[name]
  a = np.float64(p.re)
  with np.errstate(over='ignore'):
    re = func(a)
    eps = p.eps * derivative(a) if p.eps else 0.0
  return DualScalar(re, eps)


@functools.singledispatch
def _lift(node: expr.SmoothExpr, arg: DualVector) -> DualScalar:
  raise TypeError(f'Cannot lift {type(node).__name__} to dual numbers.')


@_lift.register
def _(node: expr.Const, arg: DualVector) -> DualScalar:
  return DualScalar(node.value, 0.0)


@_lift.register
def _(node: expr.Coord, arg: DualVector) -> DualScalar:
  return arg.coord(node.index)


@_lift.register
def _(node: expr.Add, arg: DualVector) -> DualScalar:
  total = _lift(node.terms[0], arg)
  for term in node.terms[1:]:
    total = dual_add(total, _lift(term, arg))
  return total


@_lift.register
def _(node: expr.Mul, arg: DualVector) -> DualScalar:
  product = _lift(node.factors[0], arg)
  for factor in node.factors[1:]:
    product = dual_mul(product, _lift(factor, arg))
  return product


@_lift.register
def _(node: expr.Scale, arg: DualVector) -> DualScalar:
  return dual_scale(node.factor, _lift(node.child, arg))


@_lift.register
def _(node: expr.IntPow, arg: DualVector) -> DualScalar:
  return dual_pow(_lift(node.child, arg), node.exponent)


@_lift.register
def _(node: expr.Prim, arg: DualVector) -> DualScalar:
  return dual_prim(node.name, _lift(node.child, arg))


def psi_eval(f: expr.SmoothExpr, arg: DualVector) -> DualScalar:
  """Evaluates f at x + eps*y: the result is f(x) + eps <grad f(x), y>."""
  return _lift(f, arg)


def jvp(f: expr.SmoothExpr, x: HVector, y: HVector) -> tuple[float, float]:
  """Returns (f(x), directional derivative of f at x along y)."""
  result = psi_eval(f, DualVector(x, y))
  return result.re, result.eps
