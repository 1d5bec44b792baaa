"""
Gaussian Expectations
Evaluates E[e^{c3 M(h)}] (lifted mode) and E[M(h)] (limit mode) for a standard
normal h, where M is a vectorized inner-maximization value function.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import logsumexp

from src.models.errors import InvalidParameterError, QuadratureDisagreementError
from src.models.state import LogExpectation, QuadratureScheme, QuadratureSpec


logger = logging.getLogger(__name__)

ValueFunction = Callable[[np.ndarray], np.ndarray]

PANEL_ORDER = 16
PANEL_REL_TOL = 1e-11
MAX_REFINEMENTS = 40
MAX_OPEN_PANELS = 4096
GROWTH_PROBE_REACH = 4.0  # probe grid spans [0, reach * tail_cut]
# c3 b_quad within this relative distance of 1/2 counts as divergent
EDGE_REL_TOL = 1e-9

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@lru_cache(maxsize=None)
def legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def hermite_rule(node_count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Physicists' Gauss-Hermite nodes and log-weights (weight e^{-x^2})."""
    x, w = np.polynomial.hermite.hermgauss(node_count)
    with np.errstate(divide='ignore'):
        log_w = np.log(w)
    x.setflags(write=False)
    log_w.setflags(write=False)
    return x, log_w


def fit_growth(M: ValueFunction, half_line: bool, spec: QuadratureSpec) -> Tuple[float, float]:
    """
    Fit M(h) ~ a0 + a1 |h| + b h^2 on the outer tenth of a probe grid.

    Returns:
        (b_quad, a1), taking the larger coefficient over both tails when the
        integrand is not folded
    """
    grid = np.linspace(0.0, GROWTH_PROBE_REACH * spec.tail_cut, spec.node_count)
    outer = grid[-max(3, spec.node_count // 10):]
    # centred basis keeps the fit well conditioned
    centre = float(np.mean(outer))
    x = outer - centre
    design = np.column_stack([np.ones_like(x), x, x * x])

    b_quad, a1 = -math.inf, -math.inf
    for sign in ((1.0,) if half_line else (1.0, -1.0)):
        coef, *_ = np.linalg.lstsq(design, np.asarray(M(sign * outer), dtype=float), rcond=None)
        b_quad = max(b_quad, float(coef[2]))
        a1 = max(a1, float(coef[1] - 2.0 * coef[2] * centre))
    return b_quad, a1


def _window(c3: float, b_quad: float, a1: float, half_line: bool, spec: QuadratureSpec) -> Tuple[float, float]:
    kappa = 0.5 - c3 * b_quad
    sigma = 1.0 / math.sqrt(2.0 * kappa)
    centre = c3 * max(a1, 0.0) * sigma * sigma
    hi = max(spec.tail_cut, centre + spec.tail_cut * sigma)
    return (0.0 if half_line else -hi), hi


def _panel_edges(lo: float, hi: float, panels: int) -> np.ndarray:
    if lo < 0.0 < hi:
        half = max(1, panels // 2)
        return np.concatenate([np.linspace(lo, 0.0, half + 1), np.linspace(0.0, hi, half + 1)[1:]])
    return np.linspace(lo, hi, panels + 1)


def _panel_sums(f: ValueFunction, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    x, w = legendre_rule(PANEL_ORDER)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    values = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (values @ w)


def integrate_panels(f: ValueFunction, lo: float, hi: float, panels: int) -> float:
    """
    Adaptive composite Gauss-Legendre integral of f over [lo, hi].

    Panels whose estimate moves under bisection by more than their share of
    PANEL_REL_TOL are split again; kinks end up inside small panels.
    """
    edges = _panel_edges(lo, hi, panels)
    a, b = edges[:-1], edges[1:]
    coarse = _panel_sums(f, a, b)
    span = hi - lo
    accepted = 0.0

    for _ in range(MAX_REFINEMENTS):
        m = 0.5 * (a + b)
        left = _panel_sums(f, a, m)
        right = _panel_sums(f, m, b)
        fine = left + right
        if not np.isfinite(fine).all():
            return accepted + fine.sum()
        scale = max(abs(accepted + fine.sum()), 1e-300)
        ok = np.abs(fine - coarse) <= PANEL_REL_TOL * scale * (b - a) / span
        accepted += fine[ok].sum()
        if ok.all():
            return accepted
        bad = ~ok
        if 2 * int(bad.sum()) > MAX_OPEN_PANELS:
            logger.debug(f"Panel budget reached with {int(bad.sum())} unsettled panels")
            return accepted + fine[bad].sum()
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        coarse = np.concatenate([left[bad], right[bad]])

    logger.debug(f"Panel refinement cap reached with {len(a)} open panels")
    return accepted + coarse.sum()


def _log_integrand(c3: float, M: ValueFunction, fold: bool) -> ValueFunction:
    def log_g(h):
        arg = np.abs(h) if fold else h
        return c3 * np.asarray(M(arg), dtype=float) - 0.5 * h * h - _LOG_SQRT_2PI
    return log_g


def _log_exp_adaptive(c3: float, M: ValueFunction, half_line: bool, lo: float, hi: float,
                      spec: QuadratureSpec) -> float:
    log_g = _log_integrand(c3, M, fold=False)
    panels = max(2, spec.node_count // PANEL_ORDER)
    probe = _panel_edges(lo, hi, 4 * panels)
    shift = float(np.max(log_g(probe)))
    with np.errstate(over='ignore'):
        total = integrate_panels(lambda h: np.exp(log_g(h) - shift), lo, hi, panels)
    if half_line:
        total *= 2.0
    return shift + math.log(total) if total > 0.0 else -math.inf


def _log_exp_hermite(c3: float, M: ValueFunction, half_line: bool, sigma: float,
                     spec: QuadratureSpec) -> float:
    x, log_w = hermite_rule(spec.node_count)
    h = math.sqrt(2.0) * sigma * x
    terms = log_w + x * x + _log_integrand(c3, M, fold=half_line)(h)
    return float(logsumexp(terms)) + math.log(math.sqrt(2.0) * sigma)


def _log_e_exp_once(c3: float, M: ValueFunction, half_line: bool, spec: QuadratureSpec) -> LogExpectation:
    b_quad, a1 = fit_growth(M, half_line, spec)
    if c3 * b_quad >= 0.5 * (1.0 - EDGE_REL_TOL):
        return LogExpectation(log_value=math.inf, finite=False)

    lo, hi = _window(c3, b_quad, a1, half_line, spec)
    if spec.scheme is QuadratureScheme.ADAPTIVE_PANEL:
        value = _log_exp_adaptive(c3, M, half_line, lo, hi, spec)
    else:
        sigma = 1.0 / math.sqrt(1.0 - 2.0 * c3 * b_quad)
        value = _log_exp_hermite(c3, M, half_line, sigma, spec)
        if spec.check_agreement:
            fallback = _log_exp_adaptive(c3, M, half_line, lo, hi, spec)
            if abs(math.expm1(fallback - value)) > spec.agreement_tol:
                logger.debug(f"Gauss-Hermite {value:.12g} replaced by adaptive panels {fallback:.12g}")
                value = fallback
    if math.isnan(value) or value == math.inf:
        return LogExpectation(log_value=math.inf, finite=False)
    return LogExpectation(log_value=value, finite=True)


def log_e_exp(c3: float, M: ValueFunction, half_line: bool, spec: QuadratureSpec) -> LogExpectation:
    """
    Log of E[e^{c3 M(h)}] for standard normal h.

    Args:
        c3: Positive lifting parameter
        M: Vectorized value function of h
        half_line: Fold to |h| (half-normal weight) when True, signed h otherwise
        spec: Quadrature resolution and rule

    Returns:
        LogExpectation; finite is False when c3 times the fitted quadratic growth
        of M reaches 1/2

    Raises:
        QuadratureDisagreementError: If check_agreement is set and N and 2N nodes
            disagree beyond agreement_tol
    """
    if not c3 > 0.0:
        raise InvalidParameterError(f"c3 must be positive, got {c3}")
    result = _log_e_exp_once(c3, M, half_line, spec)
    if spec.check_agreement and result.finite:
        fine = _log_e_exp_once(c3, M, half_line, spec.doubled())
        if not fine.finite or abs(math.expm1(fine.log_value - result.log_value)) > spec.agreement_tol:
            raise QuadratureDisagreementError(result.log_value, fine.log_value, spec.agreement_tol)
    return result


def _e_plain_once(M: ValueFunction, half_line: bool, spec: QuadratureSpec) -> float:
    if spec.scheme is QuadratureScheme.GAUSS_HERMITE:
        x, log_w = hermite_rule(spec.node_count)
        h = math.sqrt(2.0) * x
        values = np.asarray(M(np.abs(h) if half_line else h), dtype=float)
        return float(np.sum(np.exp(log_w) * values)) / math.sqrt(math.pi)

    lo = 0.0 if half_line else -spec.tail_cut
    panels = max(2, spec.node_count // PANEL_ORDER)

    def g(h):
        return np.asarray(M(h), dtype=float) * np.exp(-0.5 * h * h - _LOG_SQRT_2PI)

    total = integrate_panels(g, lo, spec.tail_cut, panels)
    return 2.0 * total if half_line else total


def e_plain(M: ValueFunction, half_line: bool, spec: QuadratureSpec) -> float:
    """
    E[M(h)] for standard normal h (folded to |h| when half_line is True).

    Raises:
        QuadratureDisagreementError: If check_agreement is set and N and 2N nodes
            disagree beyond agreement_tol
    """
    value = _e_plain_once(M, half_line, spec)
    if spec.check_agreement:
        fine = _e_plain_once(M, half_line, spec.doubled())
        if abs(fine - value) > spec.agreement_tol * max(abs(fine), 1e-300):
            raise QuadratureDisagreementError(value, fine, spec.agreement_tol)
    return value
