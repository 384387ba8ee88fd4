import math
import unittest
from unittest import mock

import numpy as np
from parameterized import parameterized

from hadamard_tools import space
from hadamard_tools.space import HVector


class HVectorTest(unittest.TestCase):

  def test_rejects_non_finite(self):
    with self.assertRaises(space.DomainError):
      HVector([1.0, math.nan])
    with self.assertRaises(space.DomainError):
      HVector([math.inf])

  def test_rejects_empty(self):
    with self.assertRaises(space.DomainError):
      HVector([])

  def test_dimension_cap(self):
    with mock.patch.object(space, 'MAX_DIM', 4):
      HVector([0.0] * 4)
      with self.assertRaises(space.DomainError):
        HVector([0.0] * 5)

  def test_is_immutable(self):
    v = HVector([1.0, 2.0])
    with self.assertRaises(ValueError):
      v.coeffs[0] = 5.0

  def test_padded_equality(self):
    self.assertEqual(HVector([1.0, 2.0]), HVector([1.0, 2.0, 0.0, 0.0]))
    self.assertNotEqual(HVector([1.0, 2.0]), HVector([1.0, 2.0, 1e-300]))

  def test_unit_and_coord(self):
    u3 = HVector.unit(3)
    self.assertEqual(u3.dim, 3)
    self.assertEqual(u3.coord(3), 1.0)
    self.assertEqual(u3.coord(1), 0.0)
    self.assertEqual(u3.coord(10), 0.0)
    self.assertEqual(HVector.unit(2, dim=5).dim, 5)

  def test_arithmetic_pads(self):
    self.assertEqual(HVector([1.0]) + HVector([0.0, 2.0]), HVector([1.0, 2.0]))
    self.assertEqual(HVector([1.0, 2.0]) - HVector([1.0]), HVector([0.0, 2.0]))
    self.assertEqual(2 * HVector([1.0, -1.0]), HVector([2.0, -2.0]))

  def test_json(self):
    v = HVector([0.1, -2.5, 3e-17])
    self.assertEqual(HVector.from_json(v.to_json()), v)


class InnerNormTest(unittest.TestCase):

  @parameterized.expand([
      ('Orthonormal', HVector.unit(1), HVector.unit(1), 1.0),
      ('Orthogonal', HVector.unit(1), HVector.unit(2), 0.0),
      ('Arithmetic', HVector([1, 2]), HVector([3, 4]), 11.0),
      ('Padded', HVector([1, 2]), HVector([3, 4, 5]), 11.0),
  ])
  def test_inner(self, _, u, v, expected):
    self.assertEqual(space.inner(u, v), expected)
    self.assertEqual(space.inner(v, u), expected)

  @parameterized.expand([
      ('Zero', HVector([0, 0, 0]), 0.0),
      ('Pythagorean', HVector([3, 4]), 5.0),
      ('Unit', HVector.unit(7), 1.0),
  ])
  def test_norm(self, _, v, expected):
    self.assertEqual(space.norm(v), expected)

  def test_cauchy_schwarz_and_padding(self):
    rng = np.random.default_rng(7)
    for _ in range(100):
      u = HVector(rng.standard_normal(5))
      v = HVector(rng.standard_normal(3))
      bound = space.norm(u) * space.norm(v)
      self.assertLessEqual(abs(space.inner(u, v)), bound * (1 + 1e-12))
      v_padded = HVector(v.padded(9))
      self.assertEqual(space.inner(u, v), space.inner(u, v_padded))
      self.assertEqual(space.norm(v), space.norm(v_padded))


class SegmentTest(unittest.TestCase):

  def test_endpoints_are_exact(self):
    a = HVector([0.1, 0.7, -3.3])
    x = HVector([1.9, -0.2])
    self.assertEqual(space.segment_point(a, x, 0.0), a)
    self.assertEqual(space.segment_point(a, x, 1.0), x)

  def test_midpoint(self):
    self.assertEqual(
        space.segment_point(HVector([0, 0]), HVector([2, 4]), 0.5),
        HVector([1, 2]))

  @parameterized.expand([('Below', -0.01), ('Above', 1.5), ('Nan', math.nan)])
  def test_parameter_outside_unit_interval(self, _, t):
    with self.assertRaises(space.DomainError):
      space.segment_point(HVector([0]), HVector([1]), t)


class DomainTest(unittest.TestCase):

  def test_whole_space(self):
    self.assertTrue(space.contains(space.WholeSpace(), HVector([1e300])))

  def test_ball_is_open(self):
    ball = space.Ball(HVector([0, 0]), 1.0)
    self.assertTrue(space.contains(ball, HVector([0.5, 0])))
    self.assertFalse(space.contains(ball, HVector([1, 0])))

  @parameterized.expand([('Zero', 0.0), ('Negative', -1.0), ('Inf', math.inf)])
  def test_ball_radius_must_be_positive(self, _, radius):
    with self.assertRaises(space.DomainError):
      space.Ball(HVector([0]), radius)

  def test_ball_is_convex(self):
    rng = np.random.default_rng(3)
    ball = space.Ball(HVector([1.0, -1.0, 0.5]), 2.0)
    for _ in range(50):
      a = space.sample_ball(rng, ball.center, ball.radius, 3)
      x = space.sample_ball(rng, ball.center, ball.radius, 3)
      for t in np.linspace(0, 1, 11):
        self.assertTrue(ball.contains(space.segment_point(a, x, float(t))))

  def test_json(self):
    for domain in (space.WholeSpace(), space.Ball(HVector([1, 2]), 0.5)):
      self.assertEqual(
          space.domain_from_json(domain.to_json()).to_json(), domain.to_json())
    with self.assertRaises(space.DomainError):
      space.domain_from_json({'kind': 'cube'})


class SamplingTest(unittest.TestCase):

  def test_sphere_is_unit(self):
    rng = np.random.default_rng(11)
    for dim in (1, 2, 8):
      self.assertAlmostEqual(space.norm(space.sample_sphere(rng, dim)), 1.0,
                             places=12)

  def test_ball_samples_are_inside_and_seeded(self):
    center = HVector([3.0])
    points1 = [
        space.sample_ball(np.random.default_rng(5), center, 4.0, 8)
        for _ in range(3)
    ]
    rng = np.random.default_rng(5)
    points2 = [space.sample_ball(rng, center, 4.0, 8) for _ in range(3)]
    self.assertEqual(points1[0], points2[0])
    for p in points2:
      self.assertEqual(p.dim, 8)
      self.assertLess(space.norm(p - center), 4.0)


if __name__ == '__main__':
  unittest.main()
