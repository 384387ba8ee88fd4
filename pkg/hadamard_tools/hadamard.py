"""Quadrature-backed Hadamard factorizations and the expansions built on them.

For f smooth on a star-convex U about a,

  f(x) = f(a) + sum_k (x_k - a_k) g_k(x),   g_k(x) = int_0^1 d_k f(a + t(x - a)) dt.

Re-factorizing g_k at the same anchor gives g_kj, and so on. A factor of
depth L (path of length L - 1) is the nested integral

  g_{i_1..i_L}(x) = int_[0,1]^L prod_l t_l^(L-l)
                      d_{i_1}..d_{i_L} f(a + t_1..t_L (x - a)) dt,

evaluated on the grid of `QuadratureSpec.nested_grid`. At the anchor it
collapses to d_{i_1}..d_{i_L} f(a) / L!.
"""

import collections
import dataclasses
import itertools
import math
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from hadamard_tools import expr
from hadamard_tools import space
from hadamard_tools.quadrature import QuadratureSpec
from hadamard_tools.space import HVector

MAX_CHAINS = 4096
"""Cap on the number of refactor chains behind one set of remainder factors."""

MAX_GRID_POINTS = 2**21
"""Cap on the nested quadrature grid evaluated per factor and point."""

VANISHING_TOL = 1e-9
"""How close to zero f must be where a representation assumes it vanishes."""

PROBE_RADIUS = 4.0
PROBE_HALVINGS = 10


class PreconditionError(ValueError):
  pass


class ResourceLimitError(RuntimeError):
  pass


@dataclasses.dataclass(frozen=True, order=True)
class MultiIndex:
  """A monomial label: (index k, exponent alpha_k) pairs, k increasing."""

  entries: tuple[tuple[int, int], ...] = ()

  def __post_init__(self):
    indices = [k for k, _ in self.entries]
    if any(k < 1 for k in indices) or indices != sorted(set(indices)):
      raise space.DomainError(
          f'Multi-index indices must be strictly increasing: {self.entries}')
    if any(alpha < 1 for _, alpha in self.entries):
      raise space.DomainError(
          f'Multi-index exponents must be positive: {self.entries}')

  @classmethod
  def from_indices(cls, indices: Iterable[int]) -> 'MultiIndex':
    counts = collections.Counter(indices)
    return cls(tuple(sorted(counts.items())))

  @property
  def degree(self) -> int:
    return sum(alpha for _, alpha in self.entries)

  @property
  def indices(self) -> tuple[int, ...]:
    """The index tuple with repetitions, e.g. x1^2*x3 -> (1, 1, 3)."""
    return tuple(k for k, alpha in self.entries for _ in range(alpha))

  def factorial(self) -> int:
    return math.prod(math.factorial(alpha) for _, alpha in self.entries)

  def multiplicity(self) -> int:
    """Number of ordered index tuples with these counts."""
    return math.factorial(self.degree) // self.factorial()

  def monomial(self, h: HVector) -> float:
    return math.prod(h.coord(k)**alpha for k, alpha in self.entries)

  def __str__(self) -> str:
    return '*'.join(f'x{k}' if alpha == 1 else f'x{k}^{alpha}'
                    for k, alpha in self.entries) or '1'

  def to_json(self) -> list[list[int]]:
    return [[k, alpha] for k, alpha in self.entries]

  @classmethod
  def from_json(cls, data: Sequence[Sequence[int]]) -> 'MultiIndex':
    return cls(tuple((int(k), int(alpha)) for k, alpha in data))


def _sort_key(alpha: MultiIndex) -> tuple[int, tuple[tuple[int, int], ...]]:
  return alpha.degree, alpha.entries


@dataclasses.dataclass(frozen=True, eq=False)
class HadamardFactorization:
  """The family {g_{path,k}} of Hadamard factors of f at `anchor`.

  An empty path is the first-order family g_k of f. A path [j] is the family
  obtained by factorizing g_j again at the same anchor, and so on.
  """

  f: expr.SmoothExpr
  anchor: HVector
  domain: space.StarDomain = space.WholeSpace()
  quad: QuadratureSpec = QuadratureSpec()
  path: tuple[int, ...] = ()

  def __post_init__(self):
    if not space.contains(self.domain, self.anchor):
      raise PreconditionError(f'Anchor {self.anchor} lies outside the domain.')
    if self.f.support and not set(self.path) <= set(self.f.support):
      raise PreconditionError(
          f'Path {list(self.path)} leaves the support {list(self.f.support)}.')
    if self.quad.grid_size(self.levels) > MAX_GRID_POINTS:
      raise ResourceLimitError(
          f'A depth-{self.levels} factor needs '
          f'{self.quad.grid_size(self.levels)} quadrature points per '
          f'evaluation; the cap is {MAX_GRID_POINTS}.')

  @property
  def levels(self) -> int:
    return len(self.path) + 1

  @property
  def support(self) -> expr.Support:
    return self.f.support

  def integrand(self, k: int) -> expr.SmoothExpr:
    """Returns the mixed partial integrated by g_{path,k}."""
    return expr.mixed_partial(self.f, self.path + (k,))

  def _check(self, x: HVector) -> None:
    if not space.contains(self.domain, x):
      raise PreconditionError(f'Point {x} lies outside the domain.')

  def _segment_grid(self, x: HVector) -> tuple[np.ndarray, np.ndarray, int]:
    dim = max([self.anchor.dim, x.dim, *self.support])
    a = self.anchor.padded(dim)
    s, weights = self.quad.nested_grid(self.levels)
    return a + np.outer(s, x.padded(dim) - a), weights, dim

  def eval_gk(self, k: int, x: HVector) -> float:
    self._check(x)
    if k not in self.support:
      return 0.0
    integrand = self.integrand(k)
    if integrand == expr.ZERO:
      return 0.0
    points, weights, _ = self._segment_grid(x)
    return float(np.dot(weights, integrand.evaluate_batch(points)))

  def eval_g(self, x: HVector) -> HVector:
    self._check(x)
    points, weights, dim = self._segment_grid(x)
    coeffs = np.zeros(dim)
    for k in self.support:
      integrand = self.integrand(k)
      if integrand != expr.ZERO:
        coeffs[k - 1] = np.dot(weights, integrand.evaluate_batch(points))
    return HVector(coeffs)

  def base_value(self) -> float:
    """The value at the anchor of the function this family factorizes."""
    if not self.path:
      return expr.evaluate(self.f, self.anchor)
    parent = dataclasses.replace(self, path=self.path[:-1])
    return parent.eval_gk(self.path[-1], self.anchor)

  def reconstruct(self, x: HVector) -> float:
    """Returns base_value() + <g(x), x - a>, which reproduces f(x)."""
    return self.base_value() + space.inner(self.eval_g(x), x - self.anchor)

  def refactor(self, k: int) -> 'HadamardFactorization':
    if self.support and k not in self.support:
      raise PreconditionError(
          f'Index {k} lies outside the support {list(self.support)}.')
    return dataclasses.replace(self, path=self.path + (k,))


def decompose(f: expr.SmoothExpr,
              a: HVector,
              domain: space.StarDomain = space.WholeSpace(),
              quad: QuadratureSpec = QuadratureSpec()) -> HadamardFactorization:
  return HadamardFactorization(f, a, domain, quad)


def eval_gk(factorization: HadamardFactorization, k: int, x: HVector) -> float:
  return factorization.eval_gk(k, x)


def eval_g(factorization: HadamardFactorization, x: HVector) -> HVector:
  return factorization.eval_g(x)


def reconstruct(factorization: HadamardFactorization, x: HVector) -> float:
  return factorization.reconstruct(x)


def refactor(factorization: HadamardFactorization,
             k: int) -> HadamardFactorization:
  return factorization.refactor(k)


@dataclasses.dataclass(frozen=True, eq=False)
class Chain:
  """The factor g_{path,index} scaled by the number of chains it stands for."""

  factorization: HadamardFactorization
  index: int
  multiplicity: int = 1

  def __call__(self, x: HVector) -> float:
    return self.multiplicity * self.factorization.eval_gk(self.index, x)

  @property
  def label(self) -> tuple[int, ...]:
    return self.factorization.path + (self.index,)


@dataclasses.dataclass(frozen=True, eq=False)
class TaylorExpansion:
  """Terms sum_{|alpha| <= order} coeff[alpha] (x - a)^alpha of f about a.

  coeff[alpha] = d^alpha f(a) / alpha!, so the degree-m part equals
  (1/m!) grad^m f(a)(x - a, ..., x - a).
  """

  f: expr.SmoothExpr
  anchor: HVector
  order: int
  coeff: dict[MultiIndex, float]

  def term(self, m: int, x: HVector) -> float:
    h = x - self.anchor
    return sum(value * alpha.monomial(h)
               for alpha, value in sorted(self.coeff.items(),
                                          key=lambda kv: _sort_key(kv[0]))
               if alpha.degree == m)

  def terms_along(self, steps: np.ndarray) -> np.ndarray:
    """Returns t[m, i], the degree-m term at anchor + steps[i]."""
    terms = np.zeros((self.order + 1, len(steps)))
    for alpha, value in sorted(self.coeff.items(),
                               key=lambda kv: _sort_key(kv[0])):
      monomial = np.ones(len(steps))
      for k, power in alpha.entries:
        monomial = monomial * steps[:, k - 1]**power
      terms[alpha.degree] += value * monomial
    return terms

  def partial_sum(self, x: HVector) -> float:
    return sum(self.term(m, x) for m in range(self.order + 1))

  def remainder(self, x: HVector) -> float:
    return expr.evaluate(self.f, x) - self.partial_sum(x)

  def derivative_vanishes(self, m: int, tol: float = VANISHING_TOL) -> bool:
    """Whether every degree-m coefficient (i.e. grad^m f(a)) is ~0."""
    return all(abs(value) <= tol
               for alpha, value in self.coeff.items()
               if alpha.degree == m)

  def to_json(self) -> dict[str, Any]:
    return {
        'anchor': self.anchor.to_json(),
        'order': self.order,
        'coefficients': [{
            'index': alpha.to_json(),
            'value': value
        } for alpha, value in sorted(self.coeff.items(),
                                     key=lambda kv: _sort_key(kv[0]))],
    }


def taylor(f: expr.SmoothExpr, a: HVector, n: int) -> TaylorExpansion:
  if n < 0:
    raise PreconditionError(f'Taylor order must be nonnegative, got {n}.')
  coeff: dict[MultiIndex, float] = {}
  for m in range(n + 1):
    for combo in itertools.combinations_with_replacement(f.support, m):
      alpha = MultiIndex.from_indices(combo)
      value = expr.evaluate(expr.mixed_partial(f, combo), a) / alpha.factorial()
      if value != 0.0:
        coeff[alpha] = value
  return TaylorExpansion(f, a, n, coeff)


def remainder_factors(
    f: expr.SmoothExpr,
    a: HVector,
    n: int,
    quad: QuadratureSpec = QuadratureSpec(),
    domain: space.StarDomain = space.WholeSpace()
) -> dict[MultiIndex, Chain]:
  """Returns {alpha: g_alpha} with f - taylor(f, a, n) = sum (x-a)^alpha g_alpha.

  Every ordered chain (i_1, .., i_{n+1}) of refactorizations contributes
  (x - a)^alpha g_{i_1..i_{n+1}}. Chains that are permutations of each other
  integrate the same mixed partial, so each multi-index keeps one chain
  scaled by its multiplicity.
  """
  if n < 0:
    raise PreconditionError(f'Taylor order must be nonnegative, got {n}.')
  chains = len(f.support)**(n + 1)
  if chains > MAX_CHAINS:
    raise ResourceLimitError(
        f'{chains} refactor chains needed for |support| = {len(f.support)} '
        f'and order {n}; the cap is {MAX_CHAINS}.')
  factors: dict[MultiIndex, Chain] = {}
  for combo in itertools.combinations_with_replacement(f.support, n + 1):
    alpha = MultiIndex.from_indices(combo)
    base = HadamardFactorization(f, a, domain, quad, tuple(combo[:-1]))
    factors[alpha] = Chain(base, combo[-1], alpha.multiplicity())
  return factors


def evaluate_factored(factors: dict[MultiIndex, Chain], a: HVector,
                      x: HVector) -> float:
  """Returns sum_alpha (x - a)^alpha g_alpha(x)."""
  h = x - a
  return sum(alpha.monomial(h) * factors[alpha](x)
             for alpha in sorted(factors, key=_sort_key))


def probe_axes(f: expr.SmoothExpr,
               radius: float = PROBE_RADIUS,
               halvings: int = PROBE_HALVINGS) -> None:
  """Checks that f vanishes on every axis span{u_n}, n in support(f).

  Probes f(0) and f(delta u_n) for delta = +-2^-p * radius, p = 0..halvings.
  """
  dim = max([1, *f.support])
  value = expr.evaluate(f, HVector.zeros(dim))
  if abs(value) > VANISHING_TOL:
    raise PreconditionError(f'f does not vanish at the origin: f(0) = {value}')
  for n in f.support:
    for p in range(halvings + 1):
      for sign in (1.0, -1.0):
        delta = sign * radius * 2.0**-p
        value = expr.evaluate(f, delta * HVector.unit(n, dim))
        if abs(value) > VANISHING_TOL:
          raise PreconditionError(
              f'f does not vanish on the axis span{{u{n}}}: '
              f'f({delta} * u{n}) = {value}')


def axes_vanishing_factor(
    f: expr.SmoothExpr,
    quad: QuadratureSpec = QuadratureSpec()
) -> dict[tuple[int, int], Chain]:
  """Returns {(k, j): g_kj} with f(x) = sum_{k,j} x_k x_j g_kj(x).

  Requires f to vanish on every axis, which makes f(0) and grad f(0) zero.
  """
  probe_axes(f)
  dim = max([1, *f.support])
  first = decompose(f, HVector.zeros(dim), space.WholeSpace(), quad)
  factors = {}
  for k in f.support:
    second = first.refactor(k)
    for j in f.support:
      factors[(k, j)] = Chain(second, j)
  return factors


def subspace_factor(f: expr.SmoothExpr,
                    k: int,
                    quad: QuadratureSpec = QuadratureSpec()
                   ) -> dict[MultiIndex, Chain]:
  """Returns {alpha: g_alpha}, |alpha| = k + 1, with f = sum x^alpha g_alpha.

  Requires grad^j f(0) = 0 for j <= k (and f(0) = 0), the conclusion drawn
  from f's derivatives vanishing on the coordinate subspaces.
  """
  if k < 1:
    raise PreconditionError(f'Subspace order must be >= 1, got {k}.')
  origin = HVector.zeros(max([1, *f.support]))
  expansion = taylor(f, origin, k)
  for m in range(k + 1):
    if not expansion.derivative_vanishes(m):
      raise PreconditionError(
          f'The order-{m} derivative of f does not vanish at the origin.')
  return remainder_factors(f, origin, k, quad)


def householder(e: np.ndarray) -> np.ndarray:
  """Returns the reflection Q (symmetric, orthogonal) with Q e = u_1.

  `e` must be a unit vector; the identity is returned when e is already u_1.
  """
  v = np.array(e, dtype=float)
  v[0] -= 1.0
  vv = float(np.dot(v, v))
  q = np.eye(v.size)
  if vv == 0.0:
    return q
  return q - (2.0 / vv) * np.outer(v, v)


@dataclasses.dataclass(frozen=True, eq=False)
class AffineChart:
  """The invertible affine map phi(x) = Q (x - z) / r."""

  origin: np.ndarray
  scale: float
  reflection: np.ndarray

  @property
  def dim(self) -> int:
    return int(self.origin.size)

  def _reflection(self, dim: int) -> np.ndarray:
    if dim == self.dim:
      return self.reflection
    q = np.eye(dim)
    q[:self.dim, :self.dim] = self.reflection
    return q

  def to_local(self, x: HVector) -> HVector:
    dim = max(self.dim, x.dim)
    z = np.zeros(dim)
    z[:self.dim] = self.origin
    return HVector(self._reflection(dim) @ (x.padded(dim) - z) / self.scale)

  def from_local(self, xi: HVector) -> HVector:
    dim = max(self.dim, xi.dim)
    z = np.zeros(dim)
    z[:self.dim] = self.origin
    return HVector(z + self.scale * (self._reflection(dim) @ xi.padded(dim)))

  def pull_back(self, f: expr.SmoothExpr) -> expr.SmoothExpr:
    """Returns f composed with the inverse chart, xi -> f(z + r Q xi)."""
    rows = self.scale * self.reflection
    return expr.substitute(f, {
        k: expr.linear(rows[k - 1], offset=float(self.origin[k - 1]))
        for k in range(1, self.dim + 1)
    })


@dataclasses.dataclass(frozen=True, eq=False)
class LocalFactor:
  """A factor given in the chart coordinates xi = phi(x)."""

  chart: AffineChart
  label: str
  local: Callable[[HVector], float]

  def __call__(self, x: HVector) -> float:
    return float(self.local(self.chart.to_local(x)))


def two_point_factor(
    f: expr.SmoothExpr,
    y: HVector,
    z: HVector,
    quad: QuadratureSpec = QuadratureSpec()
) -> tuple[list[LocalFactor], list[LocalFactor]]:
  """Returns (g, h) with f = sum_k g_k h_k, g_k(y) = 0 and h_k(z) = 0.

  The chart phi(x) = Q (x - z) / ||y - z|| sends z to 0 and y to u_1. In
  chart coordinates f~(xi) = <g~(xi), xi> and, with w = g~(phi(y)) (so
  w_1 = f(y) - f(z) = 0), the factors come in triples per basis index k:

    g_{3k-2} = g~_k - w_k,   h_{3k-2} = xi_k
    g_{3k-1} = w_k xi_k,     h_{3k-1} = xi_1
    g_{3k}   = 1 - xi_1,     h_{3k}   = w_k xi_k

  The products sum to <g~ - w, xi> + xi_1 <w, xi> + (1 - xi_1) <w, xi>,
  which is <g~, xi> = f~(xi).
  """
  diff = y - z
  r = space.norm(diff)
  if r == 0.0:
    raise PreconditionError('The two zeros y and z must be distinct.')
  for name, point in (('y', y), ('z', z)):
    value = expr.evaluate(f, point)
    if abs(value) > VANISHING_TOL:
      raise PreconditionError(f'f must vanish at {name}: f({name}) = {value}')

  dim = max([y.dim, z.dim, *f.support])
  chart = AffineChart(
      origin=z.padded(dim),
      scale=r,
      reflection=householder(diff.padded(dim) / r))
  local = decompose(chart.pull_back(f), HVector.zeros(dim), space.WholeSpace(),
                    quad)
  w = local.eval_g(chart.to_local(y)).padded(dim)

  gs: list[LocalFactor] = []
  hs: list[LocalFactor] = []
  for k in range(1, dim + 1):
    w_k = float(w[k - 1])
    gs += [
        LocalFactor(chart, f'g~{k} - w{k}',
                    lambda xi, k=k, w_k=w_k: local.eval_gk(k, xi) - w_k),
        LocalFactor(chart, f'w{k} * xi{k}',
                    lambda xi, k=k, w_k=w_k: w_k * xi.coord(k)),
        LocalFactor(chart, '1 - xi1', lambda xi: 1.0 - xi.coord(1)),
    ]
    hs += [
        LocalFactor(chart, f'xi{k}', lambda xi, k=k: xi.coord(k)),
        LocalFactor(chart, 'xi1', lambda xi: xi.coord(1)),
        LocalFactor(chart, f'w{k} * xi{k}',
                    lambda xi, k=k, w_k=w_k: w_k * xi.coord(k)),
    ]
  return gs, hs


def evaluate_products(gs: Sequence[Callable[[HVector], float]],
                      hs: Sequence[Callable[[HVector], float]],
                      x: HVector) -> float:
  return sum(g(x) * h(x) for g, h in zip(gs, hs))


@dataclasses.dataclass
class PointResidual:
  x: HVector
  f: float
  reconstructed: float
  g: HVector | None = None

  def to_json(self) -> dict[str, Any]:
    data = {'x': self.x.to_json(), 'f': self.f,
            'reconstructed': self.reconstructed}
    if self.g is not None:
      data['g'] = self.g.to_json()
    return data

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'PointResidual':
    g = data.get('g')
    return cls(HVector.from_json(data['x']), float(data['f']),
               float(data['reconstructed']),
               HVector.from_json(g) if g is not None else None)


@dataclasses.dataclass
class FactorizationReport:
  """Residuals of a reconstruction identity at a list of points."""

  function: str
  anchor: HVector
  nodes: int
  per_point: list[PointResidual]
  scheme: str = 'product'

  @property
  def max_residual(self) -> float:
    return max((abs(p.reconstructed - p.f) for p in self.per_point),
               default=0.0)

  def to_json(self) -> dict[str, Any]:
    return {
        'function': self.function,
        'anchor': self.anchor.to_json(),
        'nodes': self.nodes,
        'scheme': self.scheme,
        'max_residual': self.max_residual,
        'per_point': [p.to_json() for p in self.per_point],
    }

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'FactorizationReport':
    return cls(
        function=data['function'],
        anchor=HVector.from_json(data['anchor']),
        nodes=int(data['nodes']),
        per_point=[PointResidual.from_json(p) for p in data['per_point']],
        scheme=data.get('scheme', 'product'))


def report(factorization: HadamardFactorization,
           points: Iterable[HVector]) -> FactorizationReport:
  per_point = [
      PointResidual(x, expr.evaluate(factorization.f, x),
                    factorization.reconstruct(x), factorization.eval_g(x))
      for x in points
  ]
  return FactorizationReport(
      expr.to_text(factorization.f), factorization.anchor,
      factorization.quad.nodes, per_point, factorization.quad.scheme)
