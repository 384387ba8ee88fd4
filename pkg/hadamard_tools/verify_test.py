import math
import unittest
from unittest import mock

import numpy as np
from parameterized import parameterized

from hadamard_tools import expr
from hadamard_tools import hadamard
from hadamard_tools import parser
from hadamard_tools import space
from hadamard_tools import verify
from hadamard_tools.quadrature import QuadratureSpec
from hadamard_tools.space import HVector

FAST = verify.CheckConfig(samples=30, nested_samples=4)


class CheckConfigTest(unittest.TestCase):

  def test_defaults(self):
    cfg = verify.CheckConfig()
    self.assertEqual(
        (cfg.seed, cfg.samples, cfg.abs_tol, cfg.rel_tol, cfg.fd_step,
         cfg.dims, cfg.nodes), (42, 200, 1e-9, 1e-9, 1e-5, 8, 32))
    self.assertEqual(cfg.quad, QuadratureSpec(32))
    self.assertEqual(cfg.scheme, 'product')
    self.assertEqual(
        verify.CheckConfig(scheme='collapsed').quad,
        QuadratureSpec(32, 'collapsed'))
    self.assertEqual(cfg.nested, 20)
    self.assertEqual(verify.CheckConfig(samples=3).nested, 3)

  @parameterized.expand([
      ('NoSamples', dict(samples=0)),
      ('ZeroTolerance', dict(abs_tol=0.0)),
      ('NegativeStep', dict(fd_step=-1e-5)),
      ('InfiniteTolerance', dict(rel_tol=math.inf)),
      ('NegativeSeed', dict(seed=-1)),
      ('HugeSeed', dict(seed=2**64)),
      ('NoDims', dict(dims=0)),
      ('UnknownScheme', dict(scheme='simpson')),
  ])
  def test_invalid(self, _, kwargs):
    with self.assertRaises(verify.ConfigError):
      verify.CheckConfig(**kwargs)


class HadamardIdentityTest(unittest.TestCase):

  def test_polynomial(self):
    f = parser.parse('x1^3 * x2^2 - 4 * x3 * x1 + x2^6 / 50')
    report = verify.check_hadamard_identity(f, HVector([0.2, -0.1, 0.3]),
                                            space.WholeSpace(), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.samples_run, 30)
    self.assertEqual(report.stages, {'identity': True})

  def test_constant_has_zero_residual(self):
    report = verify.check_hadamard_identity(expr.Const(-2.0), HVector([1.0]),
                                            space.WholeSpace(), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.worst_case.residual, 0.0)

  def test_ball_samples_stay_inside(self):
    ball = space.Ball(HVector([1.0, 1.0]), 0.5)
    report = verify.check_hadamard_identity(
        parser.parse('exp(x1) * x2'), HVector([1.2, 0.9]), ball, FAST)
    self.assertTrue(report.passed)
    x = HVector.from_json(report.worst_case.input['x'])
    self.assertTrue(ball.contains(x))

  def test_crippled_quadrature_fails_reproducibly(self):
    cfg = verify.CheckConfig(samples=30, nodes=1)
    f = parser.parse('sin(x1)')
    report = verify.check_hadamard_identity(f, HVector([0.0]),
                                            space.WholeSpace(), cfg)
    self.assertFalse(report.passed)
    worst = report.worst_case
    self.assertGreater(worst.residual, 1e-3)

    # The counter-input reproduces the residual on its own.
    factorization = hadamard.decompose(
        parser.parse(worst.input['function']),
        HVector.from_json(worst.input['anchor']), space.WholeSpace(),
        QuadratureSpec(worst.input['nodes']))
    x = HVector.from_json(worst.input['x'])
    self.assertEqual(
        abs(factorization.reconstruct(x) - expr.evaluate(f, x)), worst.residual)


class GateauxFrechetTest(unittest.TestCase):

  @parameterized.expand([
      ('Square', 'x1^2'),
      ('Exp', 'exp(x1)'),
      ('Mixed', 'sin(x1 * x2) + x3^4 / 12'),
  ])
  def test_passes(self, _, text):
    self.assertTrue(verify.check_gateaux_frechet(parser.parse(text), FAST).passed)

  def test_exp_at_origin(self):
    f = parser.parse('exp(x1)')
    h = verify.CheckConfig().fd_step
    x, v = HVector([0.0]), HVector([1.0])
    difference = (expr.evaluate(f, x + h * v) -
                  expr.evaluate(f, x - h * v)) / (2 * h)
    self.assertEqual(expr.directional_derivative(f, x, v), 1.0)
    self.assertAlmostEqual(difference, 1.0, delta=1e-6)

  def test_zero_direction(self):
    f = parser.parse('x1^2 * x2')
    x, v = HVector([1.0, 2.0]), HVector.zeros(2)
    self.assertEqual(expr.directional_derivative(f, x, v), 0.0)


class RulesTest(unittest.TestCase):

  def test_linear_functionals(self):
    report = verify.check_rules(
        parser.parse('x1 - 2 * x2'), parser.parse('0.5 * x3 + x1'), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(set(report.stages),
                     {'constant', 'scalar', 'sum', 'product'})

  def test_constant(self):
    report = verify.check_rules(expr.Const(3.0), expr.Const(-1.0), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.worst_case.residual, 0.0)

  def test_sine_and_coordinate(self):
    report = verify.check_rules(
        parser.parse('sin(x1)'), parser.parse('x2'), FAST)
    self.assertTrue(report.passed)


class PsiTest(unittest.TestCase):

  def test_unit_factor_is_exact(self):
    report = verify.check_psi_homomorphism(
        parser.parse('exp(x1) * cos(x2)'), expr.ONE, FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.worst_case.residual, 0.0)

  def test_square(self):
    self.assertTrue(
        verify.check_psi_homomorphism(
            parser.parse('x1'), parser.parse('x1'), FAST).passed)

  def test_consistency(self):
    report = verify.check_psi_consistency(
        parser.parse('exp(sin(x5)) * x6 - x1^3'), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(
        report.stages, {
            'value': True,
            'derivative': True,
            'finite_difference': True,
            'nilpotent': True
        })


class TaylorOrderTest(unittest.TestCase):

  def test_cube(self):
    cfg = verify.CheckConfig(samples=10, dims=1)
    report = verify.check_taylor_order(
        parser.parse('x1^3'), HVector([0.0]), 2, cfg)
    self.assertTrue(report.passed)
    self.assertAlmostEqual(report.worst_case.input['exponent'], 3.0, delta=1e-9)

  def test_exact_polynomial(self):
    report = verify.check_taylor_order(
        parser.parse('x1 * x2 + 3 * x3^2 - x1'), HVector([0.5, 0.5, 0.5]), 2,
        FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.worst_case.residual, 0.0)

  def test_exp(self):
    cfg = verify.CheckConfig(samples=10, dims=1)
    report = verify.check_taylor_order(
        parser.parse('exp(x1)'), HVector([0.0]), 2, cfg)
    self.assertTrue(report.passed)
    self.assertAlmostEqual(report.worst_case.input['exponent'], 3.0, delta=0.1)

  def test_detects_truncated_expansion(self):
    taylor = hadamard.taylor
    with mock.patch.object(hadamard, 'taylor',
                           lambda f, a, n: taylor(f, a, n - 1)):
      report = verify.check_taylor_order(
          parser.parse('exp(x1) * sin(x2)'), HVector([0.3, 0.2]), 2, FAST)
    self.assertFalse(report.passed)
    self.assertLess(report.worst_case.input['exponent'], 2.9)

  def test_faster_decay_is_reported_as_is(self):
    cfg = verify.CheckConfig(samples=10, dims=1)
    report = verify.check_taylor_order(
        parser.parse('sin(x1)'), HVector([0.0]), 3, cfg)
    self.assertTrue(report.passed)
    self.assertAlmostEqual(report.worst_case.input['exponent'], 5.0, delta=0.1)

  def test_third_order(self):
    report = verify.check_taylor_order(
        parser.parse('exp(x1) * cos(x2)'), HVector([0.1, 0.2]), 3, FAST)
    self.assertTrue(report.passed)
    self.assertGreater(report.worst_case.input['exponent'], 3.9)

  def test_leading_term_small_along_some_directions(self):
    f = parser.parse('exp(0.5 * x3) * sin(x1 + x2)')
    cfg = verify.CheckConfig()
    report = verify.check_taylor_order(f, verify._anchor(cfg, f), 1, cfg)
    self.assertTrue(report.passed)
    self.assertAlmostEqual(report.worst_case.input['exponent'], 2.0, delta=0.1)

  def test_decay_exponent_fits_the_finest_steps(self):
    ms = [m for m in range(2, 21) if m != 6]
    # The leading terms cancel at m = 6.
    remainders = [abs(2.0**(-3 * m) - 64 * 2.0**(-4 * m)) for m in ms]
    self.assertAlmostEqual(
        verify._decay_exponent(ms, remainders), 3.0, delta=0.01)
    squares = [2.0**(-2 * m) for m in ms]
    self.assertAlmostEqual(
        verify._decay_exponent(ms, squares), 2.0, delta=1e-9)


class SubspaceVanishingTest(unittest.TestCase):

  def test_square_product(self):
    report = verify.check_subspace_vanishing(
        parser.parse('x1^2 * x2^2'), 1, FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.stages, {'probe': True, 'reconstruction': True})

  def test_coordinate_fails_probe(self):
    report = verify.check_subspace_vanishing(parser.parse('x1'), 1, FAST)
    self.assertFalse(report.passed)
    self.assertEqual(report.stages, {'probe': False, 'reconstruction': False})
    x = HVector.from_json(report.worst_case.input['x'])
    self.assertGreater(abs(expr.evaluate(parser.parse('x1'), x)), 1e-9)

  def test_zero(self):
    report = verify.check_subspace_vanishing(expr.Const(0.0), 2, FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.worst_case.residual, 0.0)

  def test_order_must_be_positive(self):
    with self.assertRaises(verify.ConfigError):
      verify.check_subspace_vanishing(expr.Const(0.0), 0, FAST)


class RepresentationChecksTest(unittest.TestCase):

  def test_remainder_factors(self):
    report = verify.check_remainder_factors(
        parser.parse('sin(x1) * x2 + exp(x3)'), HVector([0.1, 0.2, 0.3]), 2,
        FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.samples_run, 4)

  def test_axes_factor(self):
    self.assertTrue(
        verify.check_axes_factor(parser.parse('x1 * x2 * cos(x3)'),
                                 FAST).passed)

  def test_axes_factor_at_a_hundred_points(self):
    cfg = verify.CheckConfig(samples=100, abs_tol=1e-8, rel_tol=1e-8)
    report = verify.check_axes_factor(parser.parse('x1 * x2 * (1 + x3^2)'), cfg)
    self.assertTrue(report.passed)
    self.assertEqual(report.samples_run, 100)

  def test_axes_rejection(self):
    report = verify.check_axes_rejection(parser.parse('x1^2'), FAST)
    self.assertTrue(report.passed)
    self.assertIn('u1', report.worst_case.input['error'])
    self.assertFalse(
        verify.check_axes_rejection(parser.parse('x1 * x2'), FAST).passed)

  def test_two_point(self):
    report = verify.check_two_point(
        parser.parse('x1 * (x1 - 1)'), HVector([1.0]), HVector([0.0]), FAST)
    self.assertTrue(report.passed)
    self.assertEqual(report.stages, {'reconstruction': True, 'endpoints': True})


class ReportTest(unittest.TestCase):

  def test_json_lines_round_trip(self):
    reports = [
        verify.check_gateaux_frechet(parser.parse('x1^2'), FAST),
        verify.check_axes_rejection(parser.parse('x1 * x2'), FAST),
    ]
    text = verify.dump_reports(reports)
    self.assertEqual(len(text.splitlines()), 2)
    reloaded = verify.load_reports(text)
    self.assertEqual([r.to_json() for r in reloaded],
                     [r.to_json() for r in reports])

  def test_infinite_residual_is_valid_json(self):
    report = verify.CheckReport(
        'broken', False, verify.WorstCase({'exponent': None}, math.inf, 0.1), 1)
    text = verify.dump_reports([report])
    self.assertNotIn('Infinity', text)
    reloaded = verify.load_reports(text)[0]
    self.assertEqual(reloaded.worst_case.residual, math.inf)


class SuiteTest(unittest.TestCase):

  def test_small_suite_passes_and_is_deterministic(self):
    cfg = verify.CheckConfig(samples=4, nested_samples=2)
    first = verify.run_suite(cfg)
    failing = [r.name for r in first if not r.passed]
    self.assertEqual(failing, [])
    self.assertEqual(
        verify.dump_reports(first), verify.dump_reports(verify.run_suite(cfg)))

  def test_default_suite_passes(self):
    failing = [
        r.name for r in verify.run_suite(verify.CheckConfig()) if not r.passed
    ]
    self.assertEqual(failing, [])

  def test_suite_covers_orders(self):
    names = [r.name for r in verify.run_suite(
        verify.CheckConfig(samples=2, nested_samples=1),
        family=('sin(x1) * cos(x2)',))]
    for n in (1, 2, 3):
      self.assertIn(f'taylor_order[sin(x1) * cos(x2), n={n}]', names)
    for n in (1, 2):
      self.assertIn(f'remainder_factors[sin(x1) * cos(x2), n={n}]', names)

  def test_one_sample_per_check(self):
    cfg = verify.CheckConfig(samples=1)
    reports = verify.run_suite(cfg, family=verify.STANDARD_FAMILY[:3])
    self.assertTrue(all(r.samples_run == 1 for r in reports))

  def test_seed_changes_samples(self):
    f = parser.parse('sin(x1) * x2')
    a = HVector([0.0, 0.0])
    first = verify.check_hadamard_identity(f, a, space.WholeSpace(),
                                           verify.CheckConfig(samples=5))
    second = verify.check_hadamard_identity(
        f, a, space.WholeSpace(), verify.CheckConfig(samples=5, seed=7))
    self.assertNotEqual(first.worst_case.input['x'],
                        second.worst_case.input['x'])

  def test_standard_family_parses(self):
    self.assertGreaterEqual(len(verify.STANDARD_FAMILY), 12)
    supports = [parser.parse(text).support for text in verify.STANDARD_FAMILY]
    self.assertIn((), supports)
    self.assertTrue(all(max(s, default=1) <= 8 for s in supports))
    np.testing.assert_array_less(0, [len(s) for s in supports[1:]])


if __name__ == '__main__':
  unittest.main()
