"""
Self-Test
Oracle cross-checks of the numerical building blocks, printed as a pass/fail table.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from src.bounds.closed_forms import sectional_l1_limit, weak_l1_threshold
from src.bounds.exponents import condition, i_sec, sectional_objective
from src.bounds.gauss_expect import e_plain, log_e_exp
from src.bounds.inner_max import max_q_half, minus_root_values, plus_root_values
from src.bounds.q0_closed import q0_threshold
from src.bounds.special import ERFCX_COEFFICIENTS, erf, erfc, erf_series, reference_erfc
from src.bounds.sphere import i_sph
from src.bounds.threshold import ThresholdSolver
from src.models.state import (
    Mode,
    QuadratureSpec,
    ScalarProblem,
    SearchSettings,
    SignMode,
    ThresholdKind,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one oracle check."""
    name: str
    passed: bool
    error: float
    tolerance: float
    seconds: float
    detail: str = ''


Check = Callable[[], Tuple[float, float, str]]


def check_erf(coefficients: np.ndarray = ERFCX_COEFFICIENTS) -> Tuple[float, float, str]:
    """Chebyshev erf / erfc against the series and continued-fraction references."""
    xs = np.linspace(-6.0, 6.0, 241)
    worst = 0.0
    for x in xs:
        ref_erf = erf_series(float(x)) if abs(x) < 3.0 else math.copysign(1.0 - reference_erfc(abs(x)), x)
        worst = max(worst, abs(float(erf(x, coefficients)) - ref_erf))
        ref = reference_erfc(float(x))
        worst = max(worst, abs(float(erfc(x, coefficients)) - ref) / max(ref, 1e-300))
    return worst, 1e-12, 'max abs error of erf, relative error of erfc on [-6, 6]'


def check_sphere_limit() -> Tuple[float, float, str]:
    worst = max(abs(i_sph(1e-4, a).value + math.sqrt(a)) for a in np.arange(0.05, 0.96, 0.05))
    return worst, 1e-3, 'i_sph(1e-4, alpha) against -sqrt(alpha)'


def check_cubic(instances: int) -> Tuple[float, float, str]:
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(instances):
        h, nu, gamma = rng.uniform(0.0, 4.0), rng.uniform(0.0, 3.0), rng.uniform(0.05, 5.0)
        for sign, generic in ((SignMode.PLUS, plus_root_values), (SignMode.MINUS, minus_root_values)):
            closed = max_q_half(ScalarProblem(h, 0.5, nu, gamma, sign)).value
            worst = max(worst, abs(closed - float(generic(h, 0.5, nu, gamma)[1])))
    return worst, 1e-8, f'q = 1/2 cubic against generic bisection, {instances} instances'


def check_quadrature() -> Tuple[float, float, str]:
    spec = QuadratureSpec()
    worst = 0.0
    for t in (0.1, 0.5, 1.0, 2.0):
        closed = math.log(2.0) + 0.5 * t * t + norm.logcdf(t)
        got = log_e_exp(t, lambda h: h, True, spec).log_value
        worst = max(worst, abs(got - closed))
    worst = max(worst, abs(e_plain(lambda h: h, True, spec) - math.sqrt(2.0 / math.pi)))
    worst = max(worst, abs(e_plain(lambda h: h * h, True, spec) - 1.0))
    return worst, 1e-9, 'half-normal MGF, E|h| and E h^2'


def check_c3_limit() -> Tuple[float, float, str]:
    spec = QuadratureSpec()
    worst = 0.0
    for q in (0.3, 0.5, 1.0):
        limit = sectional_objective(0.0, 0.2, q, 1.0, 0.5, spec, Mode.LIMIT)
        lifted = sectional_objective(1e-4, 0.2, q, 1.0, 0.5, spec, Mode.LIFTED)
        worst = max(worst, abs(lifted - limit))
    return worst, 1e-3, 'lifted objective at c3 = 1e-4 against the c3 -> 0 objective'


def check_l1_closed_form(settings: SearchSettings) -> Tuple[float, float, str]:
    spec = QuadratureSpec()
    worst = 0.0
    for alpha, beta in ((0.5, 0.1), (0.3, 0.05)):
        got = condition(ThresholdKind.SECTIONAL, alpha, beta, 1.0, Mode.LIMIT, spec, settings).value
        worst = max(worst, abs(got - sectional_l1_limit(alpha, beta)))
    return worst, 1e-4, 'q = 1 limit-mode sectional condition against its closed form'


def check_grid_oracle(settings: SearchSettings) -> Tuple[float, float, str]:
    spec = QuadratureSpec(node_count=128)
    c3, beta, q = 0.5, 0.1, 0.5
    optimized = i_sec(c3, beta, q, spec, Mode.LIFTED, settings).value
    gammas = 0.5 * c3 + np.linspace(0.05, 2.0, 40)
    nus = np.linspace(0.0, 2.0, 21)
    grid = min(sectional_objective(c3, beta, q, g, v, spec) for g in gammas for v in nus)
    return max(0.0, optimized - grid), 1e-4, 'nested optimizer against a dense (gamma, nu) grid'


def check_weak_l1_threshold(settings: SearchSettings) -> Tuple[float, float, str]:
    solver = ThresholdSolver(QuadratureSpec(node_count=128), settings)
    got = solver.solve_beta(ThresholdKind.WEAK, 0.5, 1.0, Mode.LIMIT, 1e-4).beta
    return abs(got - weak_l1_threshold(0.5)), 2e-3, 'limit-mode weak q = 1 bisection against the exact root'


def check_q0() -> Tuple[float, float, str]:
    beta = q0_threshold(0.5, ThresholdKind.SECTIONAL, 1e4).beta
    gap = 0.25 - beta
    return (gap if gap >= 0.0 else math.inf), 0.05, 'q -> 0 sectional beta* within 0.05 below alpha/2 at c3_max = 1e4'


def _run(name: str, check: Check) -> CheckResult:
    start = time.perf_counter()
    try:
        error, tolerance, detail = check()
        passed = bool(error <= tolerance)
    except Exception as e:
        logger.error(f"Check {name} raised: {e}", exc_info=True)
        error, tolerance, detail, passed = math.inf, 0.0, f'raised {type(e).__name__}', False
    return CheckResult(name, passed, error, tolerance, time.perf_counter() - start, detail)


def run_checks(fast: bool = False, erf_coefficients: Optional[np.ndarray] = None) -> List[CheckResult]:
    """
    Run the oracle checks; `fast` keeps the sub-minute subset.

    erf_coefficients replaces the Chebyshev table in the erf check.
    """
    coefficients = ERFCX_COEFFICIENTS if erf_coefficients is None else erf_coefficients
    settings = SearchSettings(restarts=3, c3_scan_points=11, mu_scan_points=5)
    checks: List[Tuple[str, Check]] = [
        ('erf_reference', lambda: check_erf(coefficients)),
        ('sphere_limit', check_sphere_limit),
        ('cubic_vs_generic', lambda: check_cubic(200 if fast else 1000)),
        ('quadrature_oracles', check_quadrature),
        ('c3_to_zero_limit', check_c3_limit),
        ('l1_closed_form', lambda: check_l1_closed_form(settings)),
    ]
    if not fast:
        checks += [
            ('grid_vs_optimizer', lambda: check_grid_oracle(settings)),
            ('q0_attainment', check_q0),
            ('weak_l1_threshold', lambda: check_weak_l1_threshold(settings)),
        ]
    return [_run(name, check) for name, check in checks]


def print_table(results: List[CheckResult]):
    """Print the pass/fail table."""
    print(f"{'check':<22} {'result':<6} {'error':>12} {'tolerance':>12} {'seconds':>9}  detail")
    print("-" * 100)
    for r in results:
        print(f"{r.name:<22} {'PASS' if r.passed else 'FAIL':<6} {r.error:>12.3e} {r.tolerance:>12.1e} "
              f"{r.seconds:>9.2f}  {r.detail}")
    print("-" * 100)
    failed = sum(1 for r in results if not r.passed)
    print(f"{len(results) - failed}/{len(results)} checks passed")
