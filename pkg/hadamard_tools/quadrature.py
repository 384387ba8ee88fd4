"""Fixed-node Gauss-Legendre quadrature on [0, 1].

Hadamard factors of depth L are integrals over [0, 1]^L of the form

  int prod_i t_i^(L - i) * phi(t_1 * ... * t_L) dt,

one level per application of the lemma, the monomial weight coming from
differentiating under the integral sign. `nested_grid` turns such an integral
into a weighted sum over scalars s = t_1 * ... * t_L.
"""

import dataclasses
import functools
import math

import numpy as np

from hadamard_tools import space

DEFAULT_NODES = 32

SCHEMES = ('product', 'collapsed')


@functools.lru_cache(maxsize=None)
def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
  """Returns Gauss-Legendre nodes and weights mapped to [0, 1].

  Exact for polynomials of degree <= 2 * nodes - 1.
  """
  if nodes < 1:
    raise space.DomainError(f'Quadrature needs at least one node, got {nodes}.')
  x, w = np.polynomial.legendre.leggauss(nodes)
  t = (x + 1.0) / 2.0
  w = w / 2.0
  t.setflags(write=False)
  w.setflags(write=False)
  return t, w


@functools.lru_cache(maxsize=64)
def _grid(nodes: int, scheme: str,
          levels: int) -> tuple[np.ndarray, np.ndarray]:
  t, w = gauss_legendre(nodes)
  if scheme == 'collapsed':
    # int_[0,1]^L prod t_i^(L-i) phi(prod t_i) dt
    #   = 1/(L-1)! int_0^1 (1-s)^(L-1) phi(s) ds.
    s = np.array(t)
    weights = w * (1.0 - t)**(levels - 1) / math.factorial(levels - 1)
  else:
    s = np.ones(1)
    weights = np.ones(1)
    for level in range(1, levels + 1):
      s = np.outer(s, t).ravel()
      weights = np.outer(weights, w * t**(levels - level)).ravel()
  s.setflags(write=False)
  weights.setflags(write=False)
  return s, weights


@dataclasses.dataclass(frozen=True)
class QuadratureSpec:
  """Gauss-Legendre rule on [0, 1] with a fixed number of nodes."""

  nodes: int = DEFAULT_NODES
  scheme: str = 'product'
  """How nested integrals are discretized: the full tensor-product grid, or
  the equivalent one-dimensional integral with a (1 - s)^(L-1) kernel."""

  def __post_init__(self):
    if int(self.nodes) != self.nodes or self.nodes < 1:
      raise space.DomainError(
          f'Quadrature needs a positive node count, got {self.nodes}.')
    if self.scheme not in SCHEMES:
      raise space.DomainError(f'Unknown quadrature scheme: {self.scheme!r}')

  @property
  def points(self) -> np.ndarray:
    return gauss_legendre(self.nodes)[0]

  @property
  def weights(self) -> np.ndarray:
    return gauss_legendre(self.nodes)[1]

  def grid_size(self, levels: int) -> int:
    return self.nodes if self.scheme == 'collapsed' else self.nodes**levels

  def nested_grid(self, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Returns (s, weights) discretizing a depth-`levels` nested integral."""
    if levels < 1:
      raise space.DomainError(f'Nesting depth must be >= 1, got {levels}.')
    return _grid(self.nodes, self.scheme, levels)

  def integrate(self, values: np.ndarray) -> float:
    """Integrates samples taken at `points` over [0, 1]."""
    return float(np.dot(self.weights, values))
