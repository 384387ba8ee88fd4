"""Seeded property checks over smooth functions and their factorizations.

Every check draws its samples from a random stream keyed by the seed and the
check's name, so a report can be reproduced one check at a time. A failing
report names the input with the largest residual relative to its tolerance;
that input re-evaluates to the same residual on its own.
"""

import dataclasses
import json
import math
import zlib
from typing import Any, Iterable, Sequence

import numpy as np

from hadamard_tools import dual
from hadamard_tools import expr
from hadamard_tools import hadamard
from hadamard_tools import parser
from hadamard_tools import space
from hadamard_tools.quadrature import DEFAULT_NODES, SCHEMES, QuadratureSpec
from hadamard_tools.space import HVector

SAMPLE_RADIUS = 4.0
"""Sampling ball radius about the anchor when the domain is the whole space."""

ANCHOR_RADIUS = 1.0
SECOND_ORDER_TOL = 1e-10
REMAINDER_TOL = 1e-8
TWO_POINT_TOL = 1e-8
ENDPOINT_TOL = 1e-10
EXPONENT_SLACK = 0.1
TAYLOR_STEPS = range(2, 31)
"""Step exponents m of h_m = 2^-m v."""
TAYLOR_WINDOW = 7
"""Finest steps above the floor that a decay fit uses: six halvings."""
REMAINDER_FLOOR = 1e-13

STANDARD_FAMILY = (
    '3.5',
    'x4',
    '2 * x1 - 0.5 * x3 + x8',
    'x1^2 + x2^2 + x3^2 + x4^2 + x5^2 + x6^2 + x7^2 + x8^2',
    'x1 * x2 * x3^2 - x4^3 * x5',
    '(x1 - x2)^6 / 720 + x3^5 * x1 / 100',
    'sin(x1) * cos(x2)',
    'exp(0.5 * x3) * sin(x1 + x2)',
    'cos(x1 * x2) + exp(-x3 * x3 / 8)',
    'exp(sin(x5)) * x6',
    'x7 * cos(x8)^2 - sin(x6)^3',
    'exp(x1 / 4) * (x2^2 + 1)',
)

SUBSPACE_FAMILY = (
    ('0', 2),
    ('x1^2 * x2^2', 1),
    ('sin(x1) * sin(x2) * x3^2', 1),
    ('x1^3 * x2^3 * x3^3', 2),
)

AXES_FAMILY = (
    '0',
    'x1 * x2',
    'x1 * x2 * cos(x3)',
    'x1 * x2 * (1 + x3^2)',
    'sin(x1) * sin(x2) * exp(x3) + x1 * x3^2',
)

AXES_REJECTED = (
    'x1^2',
    'exp(x1) - 1',
    'cos(x2)',
)

TWO_POINT_FAMILY = (
    ('0', (1.0, 2.0), (0.0,)),
    ('x1 * (x1 - 1)', (1.0,), (0.0,)),
    ('sin(x1 - x2)', (1.0, 1.0), (0.0, 0.0)),
    ('(x1 - 2) * (x2 + 1) * exp(x3)', (2.0, 0.5, 0.0), (0.0, -1.0, 1.0)),
)

REMAINDER_MAX_SUPPORT = 4
TAYLOR_ORDERS = (1, 2, 3)
REMAINDER_ORDERS = (1, 2)


class ConfigError(ValueError):
  pass


@dataclasses.dataclass(frozen=True)
class CheckConfig:
  seed: int = 42
  samples: int = 200
  abs_tol: float = 1e-9
  rel_tol: float = 1e-9
  fd_step: float = 1e-5
  dims: int = 8
  nodes: int = DEFAULT_NODES
  exact_tol: float = 1e-12
  fd_tol: float = 1e-6
  nested_samples: int = 20
  """Sample cap for the checks built on nested quadrature."""
  scheme: str = 'product'

  def __post_init__(self):
    if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
      raise ConfigError(f'Seed must be a 64-bit unsigned integer: {self.seed}')
    for name in ('samples', 'dims', 'nodes', 'nested_samples'):
      if getattr(self, name) < 1:
        raise ConfigError(f'{name} must be >= 1, got {getattr(self, name)}.')
    for name in ('abs_tol', 'rel_tol', 'fd_step', 'exact_tol', 'fd_tol'):
      value = getattr(self, name)
      if not (math.isfinite(value) and value > 0):
        raise ConfigError(f'{name} must be positive, got {value}.')
    if self.scheme not in SCHEMES:
      raise ConfigError(f'Unknown quadrature scheme: {self.scheme!r}')

  @property
  def quad(self) -> QuadratureSpec:
    return QuadratureSpec(self.nodes, self.scheme)

  @property
  def nested(self) -> int:
    return min(self.samples, self.nested_samples)


@dataclasses.dataclass
class WorstCase:
  input: dict[str, Any]
  residual: float
  tolerance: float

  def to_json(self) -> dict[str, Any]:
    return {
        'input': self.input,
        'residual': self.residual if math.isfinite(self.residual) else None,
        'tolerance': self.tolerance
    }

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'WorstCase':
    residual = data['residual']
    return cls(dict(data['input']),
               math.inf if residual is None else float(residual),
               float(data['tolerance']))


@dataclasses.dataclass
class CheckReport:
  name: str
  passed: bool
  worst_case: WorstCase
  samples_run: int
  stages: dict[str, bool] = dataclasses.field(default_factory=dict)

  def to_json(self) -> dict[str, Any]:
    return {
        'name': self.name,
        'passed': self.passed,
        'worst_case': self.worst_case.to_json(),
        'samples_run': self.samples_run,
        'stages': dict(self.stages),
    }

  @classmethod
  def from_json(cls, data: dict[str, Any]) -> 'CheckReport':
    return cls(data['name'], bool(data['passed']),
               WorstCase.from_json(data['worst_case']),
               int(data['samples_run']),
               {k: bool(v) for k, v in data.get('stages', {}).items()})


def dump_reports(reports: Iterable[CheckReport]) -> str:
  """Serializes reports as JSON lines."""
  return ''.join(
      json.dumps(r.to_json(), allow_nan=False) + '\n' for r in reports)


def load_reports(text: str) -> list[CheckReport]:
  return [
      CheckReport.from_json(json.loads(line))
      for line in text.splitlines()
      if line.strip()
  ]


def _jsonable(value: Any) -> Any:
  if isinstance(value, HVector):
    return value.to_json()
  if isinstance(value, expr.SmoothExpr):
    return expr.to_text(value)
  if isinstance(value, (list, tuple)):
    return [_jsonable(v) for v in value]
  if isinstance(value, (np.floating, np.integer)):
    value = value.item()
  if isinstance(value, float) and not math.isfinite(value):
    return None
  return value


class _Stage:
  """Keeps the sample with the largest residual-to-tolerance ratio."""

  def __init__(self) -> None:
    self.worst: WorstCase | None = None
    self.skipped = False
    self._ratio = -math.inf

  @property
  def passed(self) -> bool:
    return not self.skipped and self._ratio <= 1.0

  @property
  def ratio(self) -> float:
    return self._ratio

  def record(self, residual: float, tolerance: float, **inputs: Any) -> None:
    residual = float(residual)
    if math.isnan(residual):
      residual = math.inf
    if tolerance > 0:
      ratio = residual / tolerance
    else:
      ratio = 0.0 if residual <= 0 else math.inf
    if ratio > self._ratio:
      self._ratio = ratio
      self.worst = WorstCase(
          {k: _jsonable(v) for k, v in inputs.items()}, residual, tolerance)


def _report(name: str, samples_run: int, **stages: _Stage) -> CheckReport:
  recorded = {k: s for k, s in stages.items() if s.worst is not None}
  if recorded:
    worst = max(recorded.values(), key=lambda s: s.ratio).worst
  else:
    worst = WorstCase({}, 0.0, 0.0)
  return CheckReport(
      name=name,
      passed=all(s.passed for s in stages.values()),
      worst_case=worst,
      samples_run=samples_run,
      stages={k: s.passed for k, s in stages.items()})


def _rng(cfg: CheckConfig, name: str) -> np.random.Generator:
  return np.random.default_rng([cfg.seed, zlib.crc32(name.encode('utf-8'))])


def _dim(cfg: CheckConfig, *parts: HVector | expr.SmoothExpr) -> int:
  dims = [cfg.dims]
  for part in parts:
    if isinstance(part, HVector):
      dims.append(part.dim)
    else:
      dims.extend(part.support)
  return max(dims)


def _sample(rng: np.random.Generator, domain: space.StarDomain, anchor: HVector,
            dim: int) -> HVector:
  if isinstance(domain, space.Ball):
    return space.sample_ball(rng, domain.center, domain.radius, dim)
  return space.sample_ball(rng, anchor, SAMPLE_RADIUS, dim)


def _sample_dual(rng: np.random.Generator, dim: int) -> dual.DualVector:
  return dual.DualVector(
      space.sample_ball(rng, HVector.zeros(dim), SAMPLE_RADIUS, dim),
      space.sample_sphere(rng, dim))


def _scaled(cfg: CheckConfig, *values: float) -> float:
  return cfg.exact_tol * max([1.0, *(abs(v) for v in values)])


def check_hadamard_identity(f: expr.SmoothExpr,
                            a: HVector,
                            domain: space.StarDomain = space.WholeSpace(),
                            cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """|f(a) + <g(x), x - a> - f(x)| <= abs_tol + rel_tol |f(x)| over samples."""
  name = f'hadamard_identity[{expr.to_text(f)}]'
  rng = _rng(cfg, name)
  factorization = hadamard.decompose(f, a, domain, cfg.quad)
  dim = _dim(cfg, f, a)
  stage = _Stage()
  for _ in range(cfg.samples):
    x = _sample(rng, domain, a, dim)
    fx = expr.evaluate(f, x)
    stage.record(
        abs(factorization.reconstruct(x) - fx),
        cfg.abs_tol + cfg.rel_tol * abs(fx),
        function=f,
        anchor=a,
        x=x,
        nodes=cfg.nodes)
  return _report(name, cfg.samples, identity=stage)


def check_gateaux_frechet(f: expr.SmoothExpr,
                          cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """Directional derivatives against central finite differences."""
  name = f'gateaux_frechet[{expr.to_text(f)}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f)
  h = cfg.fd_step
  stage = _Stage()
  for _ in range(cfg.samples):
    x = space.sample_ball(rng, HVector.zeros(dim), SAMPLE_RADIUS, dim)
    v = space.sample_sphere(rng, dim)
    derivative = expr.directional_derivative(f, x, v)
    difference = (expr.evaluate(f, x + h * v) -
                  expr.evaluate(f, x - h * v)) / (2 * h)
    scale = max(1.0, abs(derivative), abs(expr.evaluate(f, x)))
    stage.record(
        abs(difference - derivative),
        cfg.fd_tol * scale,
        function=f,
        x=x,
        v=v,
        fd_step=h)
  return _report(name, cfg.samples, derivative=stage)


def check_rules(f: expr.SmoothExpr,
                g: expr.SmoothExpr,
                cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """The constant, scalar, sum and product rules on eps-parts."""
  name = f'rules[{expr.to_text(f)} | {expr.to_text(g)}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f, g)
  stages = {k: _Stage() for k in ('constant', 'scalar', 'sum', 'product')}
  for _ in range(cfg.samples):
    w = _sample_dual(rng, dim)
    c = float(rng.uniform(-3.0, 3.0))
    pf, pg = dual.psi_eval(f, w), dual.psi_eval(g, w)
    inputs = dict(f=f, g=g, point=w.point, tangent=w.tangent, c=c)

    stages['constant'].record(
        abs(dual.psi_eval(expr.Const(c), w).eps), cfg.exact_tol, **inputs)
    expected = c * pf.eps
    stages['scalar'].record(
        abs(dual.psi_eval(c * f, w).eps - expected),
        _scaled(cfg, expected), **inputs)
    expected = pf.eps + pg.eps
    stages['sum'].record(
        abs(dual.psi_eval(f + g, w).eps - expected),
        _scaled(cfg, pf.eps, pg.eps), **inputs)
    expected = pf.eps * pg.re + pf.re * pg.eps
    stages['product'].record(
        abs(dual.psi_eval(f * g, w).eps - expected),
        _scaled(cfg, pf.eps * pg.re, pf.re * pg.eps), **inputs)
  return _report(name, cfg.samples, **stages)


def check_psi_homomorphism(f: expr.SmoothExpr,
                           g: expr.SmoothExpr,
                           cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """Psi(f g) = Psi(f) Psi(g) and Psi(1) = 1 at sampled dual arguments."""
  name = f'psi_homomorphism[{expr.to_text(f)} | {expr.to_text(g)}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f, g)
  unit, product = _Stage(), _Stage()
  for _ in range(cfg.samples):
    w = _sample_dual(rng, dim)
    inputs = dict(f=f, g=g, point=w.point, tangent=w.tangent)
    one = dual.psi_eval(expr.ONE, w)
    unit.record(
        abs(one.re - 1.0) + abs(one.eps), cfg.exact_tol, **inputs)
    lhs = dual.psi_eval(f * g, w)
    rhs = dual.dual_mul(dual.psi_eval(f, w), dual.psi_eval(g, w))
    product.record(
        max(
            abs(lhs.re - rhs.re) / max(1.0, abs(rhs.re)),
            abs(lhs.eps - rhs.eps) / max(1.0, abs(rhs.eps))),
        cfg.exact_tol, **inputs)
  return _report(name, cfg.samples, unit=unit, product=product)


def check_psi_consistency(f: expr.SmoothExpr,
                          cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """Psi(f)(x + eps y) = f(x) + eps <grad f(x), y>, and eps^2 = 0."""
  name = f'psi_consistency[{expr.to_text(f)}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f)
  h = cfg.fd_step
  stages = {
      k: _Stage()
      for k in ('value', 'derivative', 'finite_difference', 'nilpotent')
  }
  square = dual.EPSILON * dual.EPSILON
  stages['nilpotent'].record(
      abs(square.re) + abs(square.eps), cfg.exact_tol, epsilon=[0.0, 1.0])
  for _ in range(cfg.samples):
    w = _sample_dual(rng, dim)
    inputs = dict(function=f, point=w.point, tangent=w.tangent)
    result = dual.psi_eval(f, w)
    value = expr.evaluate(f, w.point)
    stages['value'].record(
        abs(result.re - value), _scaled(cfg, value), **inputs)
    derivative = expr.directional_derivative(f, w.point, w.tangent)
    stages['derivative'].record(
        abs(result.eps - derivative), _scaled(cfg, derivative), **inputs)
    difference = (expr.evaluate(f, w.point + h * w.tangent) -
                  expr.evaluate(f, w.point - h * w.tangent)) / (2 * h)
    stages['finite_difference'].record(
        abs(result.eps - difference),
        cfg.fd_tol * max(1.0, abs(result.eps), abs(value)), **inputs)
  return _report(name, cfg.samples, **stages)


def check_anchor_identities(f: expr.SmoothExpr,
                            cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """g_k(a) = grad_k f(a) and 2 g_kj(a) = grad^2_kj f(a) at sampled anchors."""
  name = f'anchor_identities[{expr.to_text(f)}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f)
  first, second = _Stage(), _Stage()
  for _ in range(cfg.nested):
    a = space.sample_ball(rng, HVector.zeros(dim), SAMPLE_RADIUS, dim)
    factorization = hadamard.decompose(f, a, space.WholeSpace(), cfg.quad)
    g = factorization.eval_g(a)
    gradient = expr.gradient(f, a)
    for k in f.support:
      first.record(
          abs(g.coord(k) - gradient.coord(k)),
          _scaled(cfg, gradient.coord(k)),
          function=f, anchor=a, k=k)
    for k in f.support:
      refactored = factorization.refactor(k)
      for j in f.support:
        hessian = expr.nth_directional(
            f, a, [HVector.unit(k, dim), HVector.unit(j, dim)])
        second.record(
            abs(2 * refactored.eval_gk(j, a) - hessian),
            SECOND_ORDER_TOL * max(1.0, abs(hessian)),
            function=f, anchor=a, k=k, j=j)
  return _report(name, cfg.nested, first_order=first, second_order=second)


def _decay_exponent(ms: Sequence[int], remainders: Sequence[float]) -> float:
  """Least-squares decay exponent over the finest TAYLOR_WINDOW steps 2^-m."""
  ms, remainders = ms[-TAYLOR_WINDOW:], remainders[-TAYLOR_WINDOW:]
  slope = np.polyfit(np.asarray(ms, dtype=float), np.log2(remainders), 1)[0]
  return -float(slope)


def check_taylor_order(f: expr.SmoothExpr,
                       a: HVector,
                       n: int,
                       cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """The order-n remainder decays like ||h||^(n+1) along halving steps.

  Each sampled direction v is paired with -v, and the remainder at a step is
  the largest over all of them. The fit uses the finest steps above the
  rounding floor.
  """
  name = f'taylor_order[{expr.to_text(f)}, n={n}]'
  rng = _rng(cfg, name)
  expansion = hadamard.taylor(f, a, n)
  dim = _dim(cfg, f, a)
  directions = [space.sample_sphere(rng, dim) for _ in range(cfg.samples)]
  directions += [-v for v in directions]
  base = a.padded(dim)
  steps = np.array([v.padded(dim) for v in directions])
  terms = expansion.terms_along(steps)
  ms, remainders, worst = [], [], []
  for m in TAYLOR_STEPS:
    h = 2.0**-m
    values = f.evaluate_batch(base + h * steps)
    partial_sums = sum(h**j * terms[j] for j in range(len(terms)))
    remainder = np.abs(values - partial_sums)
    floor = REMAINDER_FLOOR * max(1.0, float(np.max(np.abs(values))))
    i = int(np.argmax(remainder))
    if remainder[i] > floor:
      ms.append(m)
      remainders.append(float(remainder[i]))
      worst.append(i)

  stage = _Stage()
  if len(ms) < 2:
    # Zero to rounding, e.g. a polynomial of degree <= n.
    stage.record(0.0, EXPONENT_SLACK, function=f, anchor=a, order=n,
                 exponent=None)
  else:
    exponent = _decay_exponent(ms, remainders)
    stage.record(
        max(0.0, (n + 1) - exponent),
        EXPONENT_SLACK,
        function=f, anchor=a, direction=directions[worst[-1]], order=n,
        steps=ms[-TAYLOR_WINDOW:], exponent=exponent)
  return _report(name, cfg.samples, decay=stage)


def _subspace_point(rng: np.random.Generator, support: expr.Support, size: int,
                    dim: int) -> tuple[HVector, list[int]]:
  indices = sorted(rng.choice(support, size=min(size, len(support)),
                              replace=False).tolist())
  coeffs = np.zeros(dim)
  coeffs[np.asarray(indices, dtype=int) - 1] = rng.uniform(
      -SAMPLE_RADIUS, SAMPLE_RADIUS, len(indices))
  return HVector(coeffs), indices


def check_subspace_vanishing(f: expr.SmoothExpr,
                             k: int,
                             cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """Probes f on the axes and grad^j f on j-dim coordinate spans, j <= k.

  When every probe passes, f is rebuilt as sum_{|alpha| = k+1} x^alpha g_alpha.
  """
  if k < 1:
    raise ConfigError(f'Subspace order must be >= 1, got {k}.')
  name = f'subspace_vanishing[{expr.to_text(f)}, k={k}]'
  rng = _rng(cfg, name)
  dim = _dim(cfg, f)
  probe, reconstruction = _Stage(), _Stage()
  for _ in range(cfg.nested):
    if not f.support:
      x = space.sample_ball(rng, HVector.zeros(dim), SAMPLE_RADIUS, dim)
      probe.record(abs(expr.evaluate(f, x)), cfg.abs_tol, function=f, x=x)
      continue
    x, indices = _subspace_point(rng, f.support, 1, dim)
    probe.record(
        abs(expr.evaluate(f, x)), cfg.abs_tol, function=f, x=x, span=indices)
    for j in range(1, k + 1):
      x, indices = _subspace_point(rng, f.support, j, dim)
      dirs = [space.sample_sphere(rng, dim) for _ in range(j)]
      probe.record(
          abs(expr.nth_directional(f, x, dirs)),
          cfg.abs_tol,
          function=f, x=x, span=indices, order=j, directions=dirs)

  if probe.passed:
    try:
      factors = hadamard.subspace_factor(f, k, cfg.quad)
    except hadamard.PreconditionError as e:
      reconstruction.record(math.inf, cfg.abs_tol, function=f, error=str(e))
    else:
      origin = HVector.zeros(dim)
      for _ in range(cfg.nested):
        x = space.sample_ball(rng, origin, SAMPLE_RADIUS, dim)
        fx = expr.evaluate(f, x)
        reconstruction.record(
            abs(hadamard.evaluate_factored(factors, origin, x) - fx),
            cfg.abs_tol + cfg.rel_tol * abs(fx),
            function=f, x=x, order=k)
  else:
    reconstruction.skipped = True
  return _report(name, cfg.nested, probe=probe, reconstruction=reconstruction)


def check_remainder_factors(f: expr.SmoothExpr,
                            a: HVector,
                            n: int,
                            cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """sum_alpha (x - a)^alpha g_alpha(x) against the Taylor remainder."""
  name = f'remainder_factors[{expr.to_text(f)}, n={n}]'
  rng = _rng(cfg, name)
  factors = hadamard.remainder_factors(f, a, n, cfg.quad)
  expansion = hadamard.taylor(f, a, n)
  dim = _dim(cfg, f, a)
  stage = _Stage()
  for _ in range(cfg.nested):
    x = space.sample_ball(rng, a, SAMPLE_RADIUS, dim)
    remainder = expansion.remainder(x)
    stage.record(
        abs(hadamard.evaluate_factored(factors, a, x) - remainder),
        REMAINDER_TOL * max(1.0, abs(expr.evaluate(f, x))),
        function=f, anchor=a, x=x, order=n)
  return _report(name, cfg.nested, factored=stage)


def check_axes_factor(f: expr.SmoothExpr,
                      cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """f(x) = sum_{k,j} x_k x_j g_kj(x) for f vanishing on every axis."""
  name = f'axes_factor[{expr.to_text(f)}]'
  rng = _rng(cfg, name)
  factors = hadamard.axes_vanishing_factor(f, cfg.quad)
  dim = _dim(cfg, f)
  stage = _Stage()
  for _ in range(cfg.samples):
    x = space.sample_ball(rng, HVector.zeros(dim), SAMPLE_RADIUS, dim)
    fx = expr.evaluate(f, x)
    total = sum(x.coord(k) * x.coord(j) * g(x)
                for (k, j), g in sorted(factors.items()))
    stage.record(
        abs(total - fx), cfg.abs_tol + cfg.rel_tol * abs(fx), function=f, x=x)
  return _report(name, cfg.samples, reconstruction=stage)


def check_axes_rejection(f: expr.SmoothExpr,
                         cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """A function that is nonzero on some axis must be refused."""
  name = f'axes_rejection[{expr.to_text(f)}]'
  stage = _Stage()
  try:
    hadamard.axes_vanishing_factor(f, cfg.quad)
  except hadamard.PreconditionError as e:
    stage.record(0.0, 0.0, function=f, error=str(e))
  else:
    stage.record(1.0, 0.0, function=f, error=None)
  return _report(name, 1, rejection=stage)


def check_two_point(f: expr.SmoothExpr,
                    y: HVector,
                    z: HVector,
                    cfg: CheckConfig = CheckConfig()) -> CheckReport:
  """f = sum g_k h_k with g_k(y) = 0 and h_k(z) = 0."""
  name = f'two_point[{expr.to_text(f)}, y={y.to_json()}, z={z.to_json()}]'
  rng = _rng(cfg, name)
  gs, hs = hadamard.two_point_factor(f, y, z, cfg.quad)
  dim = _dim(cfg, f, y, z)
  reconstruction, endpoints = _Stage(), _Stage()
  for i, (g, h) in enumerate(zip(gs, hs), start=1):
    endpoints.record(abs(g(y)), ENDPOINT_TOL, function=f, y=y, z=z, factor=i,
                     side='g(y)')
    endpoints.record(abs(h(z)), ENDPOINT_TOL, function=f, y=y, z=z, factor=i,
                     side='h(z)')
  center = 0.5 * (y + z)
  for _ in range(cfg.nested):
    x = space.sample_ball(rng, center, SAMPLE_RADIUS, dim)
    fx = expr.evaluate(f, x)
    reconstruction.record(
        abs(hadamard.evaluate_products(gs, hs, x) - fx),
        TWO_POINT_TOL * max(1.0, abs(fx)),
        function=f, y=y, z=z, x=x)
  return _report(
      name, cfg.nested, reconstruction=reconstruction, endpoints=endpoints)


def _anchor(cfg: CheckConfig, f: expr.SmoothExpr) -> HVector:
  rng = _rng(cfg, f'anchor[{expr.to_text(f)}]')
  dim = _dim(cfg, f)
  return space.sample_ball(rng, HVector.zeros(dim), ANCHOR_RADIUS, dim)


def run_suite(cfg: CheckConfig = CheckConfig(),
              family: Sequence[str] = STANDARD_FAMILY) -> list[CheckReport]:
  """Runs every check over the built-in families, in a fixed order."""
  functions = [parser.parse(text) for text in family]
  reports = []
  for f in functions:
    a = _anchor(cfg, f)
    reports.append(check_hadamard_identity(f, a, space.WholeSpace(), cfg))
    reports.append(check_gateaux_frechet(f, cfg))
    reports.append(check_psi_consistency(f, cfg))
    reports.append(check_anchor_identities(f, cfg))
    for n in TAYLOR_ORDERS:
      reports.append(check_taylor_order(f, a, n, cfg))
    if len(f.support) <= REMAINDER_MAX_SUPPORT:
      for n in REMAINDER_ORDERS:
        reports.append(check_remainder_factors(f, a, n, cfg))
  for f, g in zip(functions, functions[1:] + functions[:1]):
    reports.append(check_rules(f, g, cfg))
    reports.append(check_psi_homomorphism(f, g, cfg))
  for text, k in SUBSPACE_FAMILY:
    reports.append(check_subspace_vanishing(parser.parse(text), k, cfg))
  for text in AXES_FAMILY:
    reports.append(check_axes_factor(parser.parse(text), cfg))
  for text in AXES_REJECTED:
    reports.append(check_axes_rejection(parser.parse(text), cfg))
  for text, y, z in TWO_POINT_FAMILY:
    reports.append(
        check_two_point(parser.parse(text), HVector(y), HVector(z), cfg))
  return reports


def run_function(f: expr.SmoothExpr,
                 cfg: CheckConfig = CheckConfig(),
                 order: int = 2) -> list[CheckReport]:
  """Runs the checks that take a single function."""
  a = _anchor(cfg, f)
  reports = [
      check_hadamard_identity(f, a, space.WholeSpace(), cfg),
      check_gateaux_frechet(f, cfg),
      check_psi_consistency(f, cfg),
      check_anchor_identities(f, cfg),
      check_taylor_order(f, a, order, cfg),
  ]
  if len(f.support) <= REMAINDER_MAX_SUPPORT:
    reports.append(check_remainder_factors(f, a, order, cfg))
  return reports
