#!/usr/bin/env python3
"""Command-line front end: factorizations, expansions and checks as JSON."""

import argparse
import json
import math
import sys
from typing import Any, Callable, Sequence

import numpy as np

from hadamard_tools import dual
from hadamard_tools import expr
from hadamard_tools import hadamard
from hadamard_tools import highlight
from hadamard_tools import parser as dsl
from hadamard_tools import space
from hadamard_tools import verify
from hadamard_tools.quadrature import DEFAULT_NODES, QuadratureSpec
from hadamard_tools.space import HVector


class CommandlineArgumentError(ValueError):
  pass


_ERRORS = (
    CommandlineArgumentError,
    OSError,
    dsl.ExpressionSyntaxError,
    space.DomainError,
    dual.DualArithmeticError,
    hadamard.PreconditionError,
    hadamard.ResourceLimitError,
    verify.ConfigError,
)


def main(argv: Sequence[str] | None = None) -> int:
  argv = list(sys.argv[1:] if argv is None else argv)
  if not argv:
    return gooey_main()

  # Gooey reruns the script with this parameter for the actual execution.
  if '--ignore-gooey' in argv:
    argv.remove('--ignore-gooey')
  return normal_main(argv)


def gooey_main() -> int:
  try:
    import gooey  # pylint: disable=import-outside-toplevel
  except ImportError:
    build_parser().print_usage(sys.stderr)
    highlight.warn('Error: no subcommand given. Install the `gui` extra to '
                   'fill the arguments in a form.')
    return 2
  form = gooey.Gooey(
      program_name='Hadamard Tools',
      optional_cols=1,
      show_restart_button=False,
  )(normal_main)
  return form(None)


def normal_main(argv: Sequence[str] | None) -> int:
  try:
    args = build_parser().parse_args(argv)
  except SystemExit as e:
    return e.code if isinstance(e.code, int) else 2
  try:
    return args.run(args)
  except CommandlineArgumentError as e:
    args.print_usage(sys.stderr)
    highlight.warn(f'Error: {e}')
    return 2
  except _ERRORS as e:
    highlight.warn(f'Error: {e}')
    return 2


def build_parser() -> argparse.ArgumentParser:
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument(
      '--nodes',
      type=int,
      default=DEFAULT_NODES,
      help='Gauss-Legendre nodes per quadrature level.')
  common.add_argument(
      '--scheme',
      choices=['product', 'collapsed'],
      default='product',
      help=('How nested factors are integrated: the tensor-product grid or '
            'the equivalent one-dimensional kernel.'))
  common.add_argument(
      '--dims',
      type=int,
      default=8,
      help='Dimension of sampled points and directions.')
  common.add_argument(
      '--seed', type=int, default=42, help='Seed of every random draw.')
  common.add_argument(
      '--samples', type=int, default=200, help='Sampled points per check.')
  common.add_argument(
      '--tol',
      type=float,
      default=1e-9,
      help='Absolute and relative tolerance of reconstruction residuals.')
  common.add_argument(
      '--output', help='Write the JSON result here instead of to stdout.')

  def function_flag(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument(
        '-f',
        '--function',
        required=required,
        help='Function in the expression DSL, or @path to read it from a file.')

  parser = argparse.ArgumentParser(
      prog='hadamard-tools',
      description=('Hadamard factorizations, Taylor expansions with factored '
                   'remainders and dual-number evaluation of smooth '
                   'functions on a truncated Hilbert space.'))
  commands = parser.add_subparsers(dest='command', required=True)

  p = commands.add_parser(
      'eval', parents=[common], help='Evaluate f at a point.')
  function_flag(p)
  p.add_argument('--point', required=True, help='Comma-separated vector.')
  p.set_defaults(run=run_eval)

  p = commands.add_parser(
      'grad', parents=[common], help='Gradient of f at a point.')
  function_flag(p)
  p.add_argument('--point', required=True, help='Comma-separated vector.')
  p.set_defaults(run=run_grad)

  p = commands.add_parser(
      'dual', parents=[common], help='Evaluate f at point + eps * tangent.')
  function_flag(p)
  p.add_argument('--point', required=True, help='Comma-separated vector.')
  p.add_argument('--tangent', required=True, help='Comma-separated vector.')
  p.set_defaults(run=run_dual)

  p = commands.add_parser(
      'hadamard',
      parents=[common],
      help='Factors g_k of f at an anchor, with reconstruction residuals.')
  function_flag(p)
  p.add_argument('--anchor', required=True, help='Anchor a; "0" for origin.')
  p.add_argument(
      '--point',
      help='Point to report on; --samples seeded points if omitted.')
  p.add_argument(
      '--radius',
      type=float,
      help='Restrict the domain to the open ball of this radius about a.')
  p.set_defaults(run=run_hadamard)

  p = commands.add_parser(
      'taylor',
      parents=[common],
      help='Taylor coefficients of f up to --order about an anchor.')
  function_flag(p)
  p.add_argument('--anchor', required=True, help='Anchor a; "0" for origin.')
  p.add_argument('--order', type=int, required=True, help='Expansion order n.')
  p.add_argument(
      '--point', help='Also report the partial sum and remainder here.')
  p.set_defaults(run=run_taylor)

  p = commands.add_parser(
      'factor-axes',
      parents=[common],
      help='f = sum x_k x_j g_kj for f vanishing on every axis.')
  function_flag(p)
  p.add_argument(
      '--point',
      help='Point to report on; --samples seeded points if omitted.')
  p.set_defaults(run=run_factor_axes)

  p = commands.add_parser(
      'factor-two-point',
      parents=[common],
      help='f = sum g_k h_k with g_k(y) = 0 and h_k(z) = 0.')
  function_flag(p)
  p.add_argument('--y', required=True, help='Zero y of f.')
  p.add_argument('--z', required=True, help='Zero z of f.')
  p.add_argument(
      '--point',
      help='Point to report on; --samples seeded points if omitted.')
  p.set_defaults(run=run_factor_two_point)

  p = commands.add_parser(
      'verify',
      parents=[common],
      help='Run the property checks; JSON lines, exit 1 on any failure.')
  function_flag(p, required=False)
  p.add_argument(
      '--order',
      type=int,
      default=2,
      help='Taylor order of the checks run on a single function.')
  p.set_defaults(run=run_verify)

  for p in commands.choices.values():
    p.set_defaults(print_usage=p.print_usage)
  return parser


def read_function(text: str) -> expr.SmoothExpr:
  if text.startswith('@'):
    with open(text[1:], encoding='utf-8') as f:
      text = f.read().strip()
  return dsl.parse(text)


def read_vector(text: str, f: expr.SmoothExpr) -> HVector:
  """Parses comma-separated decimals; "0" is the origin of f's support."""
  if text.strip() == '0':
    return HVector.zeros(max([1, *f.support]))
  try:
    return HVector([float(c) for c in text.split(',')])
  except ValueError as e:
    raise CommandlineArgumentError(f'Bad vector {text!r}: {e}') from e


def finite_json(data: Any) -> Any:
  """Replaces non-finite floats, which JSON cannot carry, by null."""
  if isinstance(data, float):
    return data if math.isfinite(data) else None
  if isinstance(data, dict):
    return {k: finite_json(v) for k, v in data.items()}
  if isinstance(data, (list, tuple)):
    return [finite_json(v) for v in data]
  return data


def write_json(args: argparse.Namespace, data: Any) -> None:
  write_text(args, json.dumps(finite_json(data), allow_nan=False) + '\n')


def write_text(args: argparse.Namespace, text: str) -> None:
  if args.output:
    with open(args.output, 'w', encoding='utf-8') as f:
      f.write(text)
  else:
    sys.stdout.write(text)


def _quad(args: argparse.Namespace) -> QuadratureSpec:
  return QuadratureSpec(args.nodes, args.scheme)


def _points(args: argparse.Namespace,
            f: expr.SmoothExpr,
            center: HVector,
            radius: float = verify.SAMPLE_RADIUS) -> list[HVector]:
  if args.point is not None:
    return [read_vector(args.point, f)]
  rng = np.random.default_rng(args.seed)
  dim = max([args.dims, center.dim, *f.support])
  return [
      space.sample_ball(rng, center, radius, dim)
      for _ in range(args.samples)
  ]


def _within(args: argparse.Namespace, residual: float, value: float) -> bool:
  return residual <= args.tol + args.tol * abs(value)


def _summarize(args: argparse.Namespace, residuals: Sequence[float],
               values: Sequence[float]) -> int:
  bad = sum(not _within(args, r, v) for r, v in zip(residuals, values))
  if bad:
    highlight.warn(f'{bad} of {len(residuals)} points exceed tolerance '
                   f'{args.tol}; max residual {max(residuals)}.')
    return 1
  highlight.ok(f'{len(residuals)} points reconstructed; max residual '
               f'{max(residuals, default=0.0)}.')
  return 0


def run_eval(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  x = read_vector(args.point, f)
  write_json(args, {
      'function': expr.to_text(f),
      'x': x.to_json(),
      'value': expr.evaluate(f, x)
  })
  return 0


def run_grad(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  x = read_vector(args.point, f)
  write_json(args, {
      'function': expr.to_text(f),
      'x': x.to_json(),
      'gradient': expr.gradient(f, x).to_json()
  })
  return 0


def run_dual(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  arg = dual.DualVector(
      read_vector(args.point, f), read_vector(args.tangent, f))
  write_json(args, dual.psi_eval(f, arg).to_json())
  return 0


def run_hadamard(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  anchor = read_vector(args.anchor, f)
  domain = (
      space.Ball(anchor, args.radius)
      if args.radius is not None else space.WholeSpace())
  factorization = hadamard.decompose(f, anchor, domain, _quad(args))
  points = _points(args, f, anchor, args.radius or verify.SAMPLE_RADIUS)
  highlight.print(f'Factorizing {expr.to_text(f)} at {anchor.to_json()} on '
                  f'{len(points)} points, {args.nodes} nodes.')
  result = hadamard.report(factorization, points)
  write_json(args, result.to_json())
  return _summarize(args, [abs(p.reconstructed - p.f) for p in result.per_point],
                    [p.f for p in result.per_point])


def run_taylor(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  anchor = read_vector(args.anchor, f)
  expansion = hadamard.taylor(f, anchor, args.order)
  data = {'function': expr.to_text(f), **expansion.to_json()}
  if args.point is not None:
    x = read_vector(args.point, f)
    data.update(
        point=x.to_json(),
        value=expr.evaluate(f, x),
        partial_sum=expansion.partial_sum(x),
        remainder=expansion.remainder(x))
  write_json(args, data)
  return 0


def _factor_report(args: argparse.Namespace, f: expr.SmoothExpr,
                   points: Sequence[HVector],
                   reconstruct: Callable[[HVector], float],
                   extra: dict[str, Any]) -> int:
  per_point = []
  for x in points:
    per_point.append({
        'x': x.to_json(),
        'f': expr.evaluate(f, x),
        'reconstructed': reconstruct(x)
    })
  residuals = [abs(p['reconstructed'] - p['f']) for p in per_point]
  write_json(
      args, {
          'function': expr.to_text(f),
          'nodes': args.nodes,
          **extra,
          'max_residual': max(residuals, default=0.0),
          'per_point': per_point,
      })
  return _summarize(args, residuals, [p['f'] for p in per_point])


def run_factor_axes(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  factors = hadamard.axes_vanishing_factor(f, _quad(args))
  highlight.print(f'{expr.to_text(f)} vanishes on every axis; '
                  f'{len(factors)} factors g_kj.')
  points = _points(args, f, HVector.zeros(max([1, *f.support])))

  def reconstruct(x: HVector) -> float:
    return sum(x.coord(k) * x.coord(j) * g(x)
               for (k, j), g in sorted(factors.items()))

  return _factor_report(
      args, f, points, reconstruct,
      {'factors': [list(g.label) for _, g in sorted(factors.items())]})


def run_factor_two_point(args: argparse.Namespace) -> int:
  f = read_function(args.function)
  y, z = read_vector(args.y, f), read_vector(args.z, f)
  gs, hs = hadamard.two_point_factor(f, y, z, _quad(args))
  highlight.print(f'{len(gs)} factor pairs for {expr.to_text(f)}.')
  points = _points(args, f, 0.5 * (y + z))
  return _factor_report(
      args, f, points, lambda x: hadamard.evaluate_products(gs, hs, x), {
          'y': y.to_json(),
          'z': z.to_json(),
          'g_at_y': [g(y) for g in gs],
          'h_at_z': [h(z) for h in hs],
          'labels': [[g.label, h.label] for g, h in zip(gs, hs)],
      })


def run_verify(args: argparse.Namespace) -> int:
  cfg = verify.CheckConfig(
      seed=args.seed,
      samples=args.samples,
      abs_tol=args.tol,
      rel_tol=args.tol,
      dims=args.dims,
      nodes=args.nodes,
      scheme=args.scheme)
  if args.function:
    f = read_function(args.function)
    highlight.print(f'Checking {expr.to_text(f)}.')
    reports = verify.run_function(f, cfg, args.order)
  else:
    highlight.print(f'Running the standard suite with seed {cfg.seed}.')
    reports = verify.run_suite(cfg)

  write_text(args, verify.dump_reports(reports))

  failed = [r.name for r in reports if not r.passed]
  if failed:
    highlight.warn(f'{len(failed)} of {len(reports)} checks failed:')
    for name in failed:
      highlight.warn(f'  {name}')
    return 1
  highlight.ok(f'All {len(reports)} checks passed.')
  return 0


if __name__ == '__main__':
  sys.exit(main())
