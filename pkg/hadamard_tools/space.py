"""The truncated separable Hilbert space: vectors, segments and domains.

An element x of the space is stored by its coefficients against the
orthonormal basis (u_k), coeffs[k - 1] = <x, u_k>. Only a finite prefix of
the basis is kept; vectors of different length interoperate by implicit
zero-padding, which is the embedding of finitely supported sequences in l^2.
"""

import dataclasses
import math
from typing import Any, Sequence

import numpy as np

MAX_DIM = 64
"""Truncation cap on the number of basis coefficients of a vector."""


class DomainError(ValueError):
  pass


@dataclasses.dataclass(frozen=True, eq=False)
class HVector:
  """An element of the truncated l^2 space."""

  coeffs: np.ndarray

  def __post_init__(self):
    arr = np.array(self.coeffs, dtype=float).reshape(-1)
    if arr.size < 1:
      raise DomainError('A vector needs at least one coefficient.')
    if arr.size > MAX_DIM:
      raise DomainError(
          f'Vector dimension {arr.size} exceeds the truncation cap {MAX_DIM}.')
    if not np.all(np.isfinite(arr)):
      raise DomainError(f'Vector coefficients must be finite: {arr.tolist()}')
    arr.setflags(write=False)
    object.__setattr__(self, 'coeffs', arr)

  @property
  def dim(self) -> int:
    return int(self.coeffs.size)

  @classmethod
  def zeros(cls, dim: int) -> 'HVector':
    return cls(np.zeros(max(1, dim)))

  @classmethod
  def unit(cls, k: int, dim: int | None = None) -> 'HVector':
    """The basis vector u_k (1-based), optionally padded to `dim`."""
    if k < 1:
      raise DomainError(f'Basis indices are 1-based, got {k}.')
    arr = np.zeros(max(k, dim or 0))
    arr[k - 1] = 1.0
    return cls(arr)

  def coord(self, k: int) -> float:
    """Returns x_k = <x, u_k>, reading 0 beyond the stored prefix."""
    return float(self.coeffs[k - 1]) if k <= self.dim else 0.0

  def padded(self, dim: int) -> np.ndarray:
    """Returns the coefficients zero-padded to at least `dim` entries."""
    if dim <= self.dim:
      return np.array(self.coeffs)
    arr = np.zeros(dim)
    arr[:self.dim] = self.coeffs
    return arr

  def _pair(self, other: 'HVector') -> tuple[np.ndarray, np.ndarray]:
    dim = max(self.dim, other.dim)
    return self.padded(dim), other.padded(dim)

  def __add__(self, other: 'HVector') -> 'HVector':
    u, v = self._pair(other)
    return HVector(u + v)

  def __sub__(self, other: 'HVector') -> 'HVector':
    u, v = self._pair(other)
    return HVector(u - v)

  def __mul__(self, scalar: float) -> 'HVector':
    return HVector(self.coeffs * float(scalar))

  __rmul__ = __mul__

  def __neg__(self) -> 'HVector':
    return HVector(-self.coeffs)

  def __eq__(self, other: object) -> bool:
    if not isinstance(other, HVector):
      return NotImplemented
    u, v = self._pair(other)
    return bool(np.array_equal(u, v))

  __hash__ = None  # type: ignore[assignment]

  def __repr__(self) -> str:
    return f'HVector({self.coeffs.tolist()})'

  def to_json(self) -> list[float]:
    return [float(c) for c in self.coeffs]

  @classmethod
  def from_json(cls, data: Sequence[float]) -> 'HVector':
    return cls(np.array([float(c) for c in data]))


@dataclasses.dataclass(frozen=True)
class WholeSpace:
  """The whole space H, star-convex about every point."""

  def contains(self, x: HVector) -> bool:
    del x
    return True

  def to_json(self) -> dict[str, Any]:
    return {'kind': 'whole'}


@dataclasses.dataclass(frozen=True, eq=False)
class Ball:
  """The open ball {x : ||x - center|| < radius}."""

  center: HVector
  radius: float

  def __post_init__(self):
    if not (math.isfinite(self.radius) and self.radius > 0):
      raise DomainError(f'Ball radius must be positive, got {self.radius}.')

  def contains(self, x: HVector) -> bool:
    return norm(x - self.center) < self.radius

  def to_json(self) -> dict[str, Any]:
    return {
        'kind': 'ball',
        'center': self.center.to_json(),
        'radius': float(self.radius),
    }


StarDomain = WholeSpace | Ball


def domain_from_json(data: dict[str, Any]) -> StarDomain:
  kind = data.get('kind')
  if kind == 'whole':
    return WholeSpace()
  if kind == 'ball':
    return Ball(HVector.from_json(data['center']), float(data['radius']))
  raise DomainError(f'Unknown domain kind: {kind!r}')


def inner(u: HVector, v: HVector) -> float:
  a, b = u._pair(v)
  return float(np.dot(a, b))


def norm(v: HVector) -> float:
  return math.sqrt(inner(v, v))


def segment_point(a: HVector, x: HVector, t: float) -> HVector:
  """Returns the point (1 - t) a + t x of the segment from a to x."""
  if not 0.0 <= t <= 1.0:
    raise DomainError(f'Segment parameter must lie in [0, 1], got {t}.')
  u, v = a._pair(x)
  return HVector((1.0 - t) * u + t * v)


def contains(domain: StarDomain, x: HVector) -> bool:
  return domain.contains(x)


def sample_sphere(rng: np.random.Generator, dim: int) -> HVector:
  """Draws a direction uniformly from the unit sphere of R^dim."""
  while True:
    direction = rng.standard_normal(dim)
    length = math.sqrt(float(np.dot(direction, direction)))
    if length > 0:
      return HVector(direction / length)


def sample_ball(rng: np.random.Generator, center: HVector, radius: float,
                dim: int) -> HVector:
  """Draws a point uniformly from the open ball of R^dim about `center`.

  Uses the direction-radius parameterization: a uniform direction scaled by
  radius * U^(1/dim), so no draw is rejected.
  """
  dim = max(dim, center.dim)
  direction = sample_sphere(rng, dim)
  r = radius * float(rng.random())**(1.0 / dim)
  return HVector(center.padded(dim) + r * direction.coeffs)
