"""
Threshold Exponents
Assembles I_sec, I_str and I_weak by nested minimization over the lifting
variables, and evaluates the certification condition
F(c3) = -c3/2 + I_kind(c3, beta) + I_sph(c3, alpha) together with its c3 -> 0
corollary.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.bounds.gauss_expect import e_plain, log_e_exp
from src.bounds.inner_max import (
    minus_values,
    plus_values,
    strong_values,
    weak_support_limit_values,
    weak_support_values,
)
from src.bounds.sphere import i_sph, i_sph_limit
from src.models.errors import AllInfeasibleError, InvalidParameterError
from src.models.state import (
    ConditionValue,
    ExponentValue,
    LiftParams,
    Mode,
    QuadratureSpec,
    SearchSettings,
    ThresholdKind,
)
from src.utils.optimize import golden_section, multistart_nelder_mead, scan_then_golden


logger = logging.getLogger(__name__)

GAMMA_MARGIN = 1e-9
LIMIT_GAMMA_FLOOR = 1e-8

# (weight, value function, folded to |h|)
Part = Tuple[float, Callable[[np.ndarray], np.ndarray], bool]


def _check_domain(kind: ThresholdKind, beta: float, q: float):
    upper = 0.5 if kind is ThresholdKind.STRONG else 1.0
    if not 0.0 < beta < 1.0 or beta > upper:
        raise InvalidParameterError(f"beta={beta} outside the {kind.value} domain (0, {upper})")
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q}")


def gamma_floor(c3: float, mode: Mode) -> float:
    """Smallest admissible gamma; lifted mode needs gamma > c3/2 for integrability."""
    if mode is Mode.LIFTED:
        return 0.5 * c3 * (1.0 + GAMMA_MARGIN)
    return LIMIT_GAMMA_FLOOR


def _term(M: Callable[[np.ndarray], np.ndarray], folded: bool, c3: float, mode: Mode,
          spec: QuadratureSpec) -> float:
    """log E e^{c3 M}/c3 in lifted mode, E M in limit mode."""
    if mode is Mode.LIFTED:
        expectation = log_e_exp(c3, M, folded, spec)
        return expectation.log_value / c3 if expectation.finite else math.inf
    return e_plain(M, folded, spec)


@lru_cache(maxsize=4096)
def _minus_term(c3: float, q: float, nu: float, gamma: float, mode: Mode, spec: QuadratureSpec) -> float:
    # off-support term, shared by the sectional and weak objectives and across mu
    return _term(lambda h: minus_values(h, q, nu, gamma)[1], True, c3, mode, spec)


def _combine(gamma_term: float, parts: Sequence[Part], c3: float, mode: Mode, spec: QuadratureSpec) -> float:
    total = gamma_term
    for weight, M, folded in parts:
        if weight == 0.0:
            continue
        total += weight * _term(M, folded, c3, mode, spec)
        if total == math.inf:
            return total
    return total


def _with_minus_term(total: float, weight: float, c3: float, q: float, nu: float, gamma: float,
                     mode: Mode, spec: QuadratureSpec) -> float:
    if weight == 0.0 or total == math.inf:
        return total
    key_c3 = c3 if mode is Mode.LIFTED else 0.0
    return total + weight * _minus_term(key_c3, q, nu, gamma, mode, spec)


def sectional_objective(c3: float, beta: float, q: float, gamma: float, nu: float,
                        spec: QuadratureSpec, mode: Mode = Mode.LIFTED) -> float:
    """gamma + beta/c3 log E e^{c3 max_plus} + (1-beta)/c3 log E e^{c3 max_minus}."""
    if gamma < gamma_floor(c3, mode):
        return math.inf
    total = _combine(gamma, [(beta, lambda h: plus_values(h, q, nu, gamma)[1], True)], c3, mode, spec)
    return _with_minus_term(total, 1.0 - beta, c3, q, nu, gamma, mode, spec)


def strong_objective(c3: float, beta: float, q: float, gamma: float, nu1: float, nu2: float,
                     spec: QuadratureSpec, mode: Mode = Mode.LIFTED) -> float:
    """gamma + nu2 (2 beta - 1) + 1/c3 log E e^{c3 max_strong}."""
    if gamma < gamma_floor(c3, mode):
        return math.inf
    parts = [(1.0, lambda h: strong_values(h, q, nu1, nu2, gamma)[1], True)]
    return _combine(gamma + nu2 * (2.0 * beta - 1.0), parts, c3, mode, spec)


def weak_objective(c3: float, beta: float, q: float, gamma: float, nu: float, mu: float,
                   spec: QuadratureSpec, mode: Mode = Mode.LIFTED) -> float:
    """gamma + beta/c3 log E e^{c3 max_weak_support} (signed h) + (1-beta)/c3 log E e^{c3 max_minus}."""
    if gamma < gamma_floor(c3, mode):
        return math.inf
    if math.isinf(mu):
        def on_support(h):
            return weak_support_limit_values(h, q, nu, gamma)[1]
    else:
        def on_support(h):
            return weak_support_values(h, q, nu, gamma, mu)[1]
    total = _combine(gamma, [(beta, on_support, False)], c3, mode, spec)
    return _with_minus_term(total, 1.0 - beta, c3, q, nu, gamma, mode, spec)


def _seeds(kind: ThresholdKind, c3: float, mode: Mode, alpha_hint: float, restarts: int,
           warm_start: Optional[LiftParams]) -> List[np.ndarray]:
    floor = gamma_floor(c3, mode)
    offset = 0.5 * c3 if mode is Mode.LIFTED else 0.0
    base = offset + 0.5 * math.sqrt(alpha_hint)
    gammas = [base, base, 2.0 * base + 0.1, offset + 0.1, offset + 1.5]
    nus = [0.0, 1.0, 0.5, 0.25, 2.0]
    nu2s = [0.0, 0.1, 0.3, 0.0, 0.5]

    def point(gamma, nu, nu2):
        gamma = max(gamma, floor + 0.05)
        if kind is ThresholdKind.STRONG:
            return np.array([gamma, nu, nu2])
        return np.array([gamma, nu])

    seeds = [point(g, n, n2) for g, n, n2 in zip(gammas, nus, nu2s)][:restarts]
    if warm_start is not None:
        # keep the distance to the integrability edge when c3 moved; the full cold set stays
        gamma = warm_start.gamma - 0.5 * warm_start.c3 + offset if mode is Mode.LIFTED else warm_start.gamma
        seeds = [point(gamma, warm_start.nu1, warm_start.nu2)] + seeds
    return seeds


def _minimize(kind: ThresholdKind, objective: Callable[[np.ndarray], float], c3: float, mode: Mode,
              settings: SearchSettings, alpha_hint: float, warm_start: Optional[LiftParams],
              mu: float = 0.0) -> ExponentValue:
    seeds = _seeds(kind, c3, mode, alpha_hint, settings.restarts, warm_start)
    lower = [gamma_floor(c3, mode)] + [0.0] * (len(seeds[0]) - 1)
    best = multistart_nelder_mead(objective, seeds, lower, settings.max_evals,
                                  settings.xatol, settings.fatol)
    if not math.isfinite(best['fun']):
        raise AllInfeasibleError(
            f"No finite {kind.value} exponent at c3={c3}, mode={mode.value}"
        )
    x = best['x']
    argmin = LiftParams(
        c3=c3 if mode is Mode.LIFTED else 0.0,
        gamma=float(x[0]),
        nu1=float(x[1]),
        nu2=float(x[2]) if kind is ThresholdKind.STRONG else 0.0,
        mu=mu,
    )
    return ExponentValue(
        value=best['fun'],
        argmin=argmin,
        feasible=True,
        mode=mode,
        converged=best['converged'],
        evaluations=best['evaluations'],
    )


def i_sec(c3: float, beta: float, q: float, spec: QuadratureSpec, mode: Mode = Mode.LIFTED,
          settings: Optional[SearchSettings] = None, warm_start: Optional[LiftParams] = None,
          alpha_hint: float = 0.5) -> ExponentValue:
    """
    Sectional exponent: min over gamma, nu >= 0 of the sectional objective.

    Args:
        c3: Lifting parameter (ignored in limit mode)
        beta: Sparsity ratio in (0, 1)
        q: Exponent in [0, 1]
        spec: Quadrature resolution
        mode: LIFTED uses log E e^{c3 M}/c3, LIMIT uses E M
        settings: Optimizer knobs
        warm_start: Previous argmin used as the first seed
        alpha_hint: Measurement ratio used for the closed-form-informed seed

    Returns:
        ExponentValue with the minimized value and its argmin
    """
    _check_domain(ThresholdKind.SECTIONAL, beta, q)
    settings = settings or SearchSettings()
    return _minimize(
        ThresholdKind.SECTIONAL,
        lambda x: sectional_objective(c3, beta, q, x[0], x[1], spec, mode),
        c3, mode, settings, alpha_hint, warm_start,
    )


def i_str(c3: float, beta: float, q: float, spec: QuadratureSpec, mode: Mode = Mode.LIFTED,
          settings: Optional[SearchSettings] = None, warm_start: Optional[LiftParams] = None,
          alpha_hint: float = 0.5) -> ExponentValue:
    """Strong exponent: min over gamma, nu1, nu2 >= 0 of the strong objective."""
    _check_domain(ThresholdKind.STRONG, beta, q)
    settings = settings or SearchSettings()
    return _minimize(
        ThresholdKind.STRONG,
        lambda x: strong_objective(c3, beta, q, x[0], x[1], x[2], spec, mode),
        c3, mode, settings, alpha_hint, warm_start,
    )


def i_weak(c3: float, beta: float, q: float, mu: float, spec: QuadratureSpec, mode: Mode = Mode.LIFTED,
           settings: Optional[SearchSettings] = None, warm_start: Optional[LiftParams] = None,
           alpha_hint: float = 0.5) -> ExponentValue:
    """Weak exponent at support magnitude mu (math.inf for the mu -> infinity probe)."""
    _check_domain(ThresholdKind.WEAK, beta, q)
    if mu < 0.0:
        raise InvalidParameterError(f"mu must be nonnegative, got {mu}")
    settings = settings or SearchSettings()
    return _minimize(
        ThresholdKind.WEAK,
        lambda x: weak_objective(c3, beta, q, x[0], x[1], mu, spec, mode),
        c3, mode, settings, alpha_hint, warm_start, mu=mu,
    )


def exponent(kind: ThresholdKind, c3: float, beta: float, q: float, spec: QuadratureSpec, mode: Mode,
             settings: Optional[SearchSettings] = None, warm_start: Optional[LiftParams] = None,
             alpha_hint: float = 0.5, mu: float = 0.0) -> ExponentValue:
    """Dispatch to i_sec, i_str or i_weak."""
    if kind is ThresholdKind.SECTIONAL:
        return i_sec(c3, beta, q, spec, mode, settings, warm_start, alpha_hint)
    if kind is ThresholdKind.STRONG:
        return i_str(c3, beta, q, spec, mode, settings, warm_start, alpha_hint)
    return i_weak(c3, beta, q, mu, spec, mode, settings, warm_start, alpha_hint)


class _ConditionSearch:
    """Min over c3 (and, for the weak kind, max over mu) with warm-started seeds."""

    def __init__(self, kind: ThresholdKind, alpha: float, beta: float, q: float, spec: QuadratureSpec,
                 settings: SearchSettings, warm_start: Optional[LiftParams], sign_only: bool):
        self.kind = kind
        self.alpha = alpha
        self.beta = beta
        self.q = q
        self.spec = spec
        self.settings = settings
        self.warm = warm_start
        self.sign_only = sign_only
        self.flags: List[str] = []
        self.argmins: Dict[Tuple[float, float], LiftParams] = {}

    def _exponent(self, c3: float, mode: Mode, mu: float) -> ExponentValue:
        value = exponent(self.kind, c3, self.beta, self.q, self.spec, mode, self.settings,
                         self.warm, self.alpha, mu)
        if not value.converged and 'optimizer_nonconvergence' not in self.flags:
            self.flags.append('optimizer_nonconvergence')
        self.warm = value.argmin
        return value

    def limit_value(self, mu: float) -> float:
        value = self._exponent(0.0, Mode.LIMIT, mu)
        self.argmins[(0.0, mu)] = value.argmin
        return value.value + i_sph_limit(self.alpha)

    def lifted_value(self, c3: float, mu: float) -> float:
        value = self._exponent(c3, Mode.LIFTED, mu)
        self.argmins[(c3, mu)] = value.argmin
        return -0.5 * c3 + value.value + i_sph(c3, self.alpha).value

    def min_over_c3(self, mu: float) -> Tuple[float, float]:
        """Returns (value, c3*) with c3* = 0 for the limit endpoint."""
        stop = 0.0 if self.sign_only else None
        best_value, best_c3 = math.inf, math.nan
        if self.settings.include_limit_endpoint:
            best_value, best_c3 = self.limit_value(mu), 0.0
            if stop is not None and best_value < stop:
                return best_value, best_c3
        search = scan_then_golden(
            lambda c3: self.lifted_value(c3, mu),
            self.settings.c3_min, self.settings.c3_max,
            self.settings.c3_scan_points, self.settings.c3_golden_tol,
            stop_below=stop,
        )
        if not search['converged'] and 'c3_search_nonconvergence' not in self.flags:
            self.flags.append('c3_search_nonconvergence')
        if search['minimum'] < best_value:
            best_value, best_c3 = search['minimum'], search['argmin']
        return best_value, best_c3


def _mu_candidates(settings: SearchSettings) -> List[float]:
    grid = [0.0] + list(np.geomspace(settings.mu_min, settings.mu_max, settings.mu_scan_points))
    if settings.probe_mu_infinity:
        grid.append(math.inf)
    return grid


def _max_over_mu(value_at: Callable[[float], float], settings: SearchSettings,
                 stop_at_or_above: Optional[float]) -> Tuple[float, float]:
    """Coarse scan over mu (with 0 and the infinity probe), golden refinement in log mu."""
    grid = _mu_candidates(settings)
    values = []
    for mu in grid:
        v = value_at(mu)
        values.append(v)
        if stop_at_or_above is not None and v >= stop_at_or_above:
            return v, mu
    best = int(np.argmax(values))
    best_value, best_mu = values[best], grid[best]

    finite = [i for i, mu in enumerate(grid) if 0.0 < mu < math.inf]
    inner = max(finite, key=lambda i: values[i])
    left = math.log(grid[max(inner - 1, finite[0])])
    right = math.log(grid[min(inner + 1, finite[-1])])
    line = golden_section(lambda t: -value_at(math.exp(t)), left, right, settings.mu_golden_tol)
    if -line['minimum'] > best_value:
        best_value, best_mu = -line['minimum'], math.exp(line['argmin'])
    return best_value, best_mu


def condition(kind: ThresholdKind, alpha: float, beta: float, q: float, mode: Mode,
              spec: QuadratureSpec, settings: Optional[SearchSettings] = None,
              warm_start: Optional[LiftParams] = None, sign_only: bool = False) -> ConditionValue:
    """
    Certification condition at (alpha, beta, q); a negative value certifies the point.

    Lifted mode minimizes -c3/2 + I_kind + I_sph over c3 (the limit value is
    included as the c3 -> 0 endpoint); limit mode returns I_kind + (-sqrt(alpha)).
    The weak kind additionally maximizes over the common support magnitude mu.

    Args:
        kind: Threshold notion
        alpha: Measurement ratio in (0, 1]
        beta: Sparsity ratio
        q: Exponent in [0, 1]
        mode: LIFTED or LIMIT
        spec: Quadrature resolution
        settings: Search knobs
        warm_start: Argmin of a nearby evaluation used as first seed
        sign_only: Allow early exit once the sign is settled (value is then not
            the extremum, flagged 'sign_only')

    Returns:
        ConditionValue with value, argmin diagnostics and flags
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
    _check_domain(kind, beta, q)
    settings = settings or SearchSettings()
    search = _ConditionSearch(kind, alpha, beta, q, spec, settings, warm_start, sign_only)

    if mode is Mode.LIMIT:
        def value_at(mu):
            return search.limit_value(mu), 0.0
    else:
        value_at = search.min_over_c3

    if kind is ThresholdKind.WEAK:
        c3_at: Dict[float, float] = {}

        def weak_value(mu):
            v, c3 = value_at(mu)
            c3_at[mu] = c3
            return v

        value, mu_star = _max_over_mu(weak_value, settings, 0.0 if sign_only else None)
        c3_star = c3_at[mu_star]
    else:
        mu_star = 0.0
        value, c3_star = value_at(0.0)

    argmin = search.argmins.get((c3_star, mu_star))
    flags = list(search.flags)
    if sign_only:
        flags.append('sign_only')
    logger.debug(
        f"condition {kind.value} {mode.value} alpha={alpha:.4g} beta={beta:.6g} q={q:.3g}: "
        f"{value:.6g} (c3*={c3_star:.4g}, mu*={mu_star:.4g})"
    )
    return ConditionValue(value=value, argmin=argmin, mode=mode, flags=tuple(flags))
