"""
q -> 0 Closed Forms
Closed-form sectional and strong conditions of the counting (q -> 0) case,
written through erf / erfc, and the best certified beta they yield.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.optimize import minimize

from src.bounds.special import erf, log_erfc
from src.bounds.sphere import i_sph
from src.models.errors import InvalidParameterError
from src.models.state import Q0Params, Q0Threshold, ThresholdKind


logger = logging.getLogger(__name__)

C3_GRID_POINTS = 13
C3_GRID_SPAN = 1e4
MARGIN_SHRINK = 1e-9


def _log_tail_term(p: Q0Params) -> float:
    """log(e^{-b nu}/sqrt(1-2b) erfc(sqrt((1-2b) nu/2)) + erf(sqrt(nu/2)))."""
    s, nu = p.slack, p.nu_g
    tail = -p.b * nu - 0.5 * math.log(s) + float(log_erfc(math.sqrt(0.5 * s * nu)))
    body = float(erf(math.sqrt(0.5 * nu)))
    if body <= 0.0:
        return tail
    return float(np.logaddexp(tail, math.log(body)))


def q0_coefficients(kind: ThresholdKind, p: Q0Params) -> Tuple[float, float]:
    """
    Split the condition as C0 + beta * C1.

    The sectional beta-coefficient carries -log(1-2b)/(2 c3), which equals
    -log(alpha/c3^2)/(2 c3) when 1 - 2b = alpha/c3^2.
    """
    c3 = p.c3
    c0 = c3 * p.slack / (4.0 * p.b) + _log_tail_term(p) / c3 + i_sph(c3, p.alpha).value
    if kind is ThresholdKind.SECTIONAL:
        c1 = (-0.5 * math.log(p.slack) + p.b * p.nu_g) / c3
    elif kind is ThresholdKind.STRONG:
        c1 = 2.0 * p.b * p.nu_g / c3
    else:
        raise InvalidParameterError("q -> 0 closed forms exist for sectional and strong only")
    return c0, c1


def q0_sectional_condition(p: Q0Params) -> float:
    """Sectional q -> 0 condition; negative certifies (alpha, beta)."""
    c0, c1 = q0_coefficients(ThresholdKind.SECTIONAL, p)
    return c0 + p.beta * c1


def q0_strong_condition(p: Q0Params) -> float:
    """Strong q -> 0 condition; negative certifies (alpha, beta)."""
    c0, c1 = q0_coefficients(ThresholdKind.STRONG, p)
    return c0 + p.beta * c1


def _params(c3: float, tau: float, nu: float, alpha: float, beta: float = 0.0) -> Q0Params:
    # slack = exp(-exp(tau)) keeps 1 - 2b inside (0, 1)
    return Q0Params.from_slack(c3, math.exp(-math.exp(tau)), max(nu, 0.0), alpha, beta)


def _certified_beta(kind: ThresholdKind, c3: float, tau: float, nu: float, alpha: float) -> float:
    try:
        c0, c1 = q0_coefficients(kind, _params(c3, tau, nu, alpha))
    except (InvalidParameterError, ValueError, OverflowError):
        return -math.inf
    if c1 <= 0.0:
        return -math.inf
    return -c0 / c1


def _seeds(c3: float, alpha: float) -> List[Tuple[float, float]]:
    seeds = [(math.log(-math.log(0.5)), 1.0), (math.log(-math.log(0.1)), 3.0),
             (math.log(-math.log(1e-3)), 7.0)]
    if c3 * c3 > alpha:
        seeds.insert(0, (math.log(math.log(c3 * c3 / alpha)), math.log(c3 * c3 / alpha)))
    return seeds


def q0_threshold(alpha: float, kind: ThresholdKind, c3_max: float) -> Q0Threshold:
    """
    Largest beta certified by the q -> 0 closed form with c3 <= c3_max.

    The condition is affine in beta, so for every (c3, b, nu_g) the certified
    beta is -C0/C1; it is maximized over (b, nu_g) on a geometric c3 grid ending
    at c3_max, seeded with the large-c3 choice 1-2b = alpha/c3^2,
    nu_g = log(c3^2/alpha).

    Returns:
        Q0Threshold with the certified beta, the condition value there (margin)
        and the maximizing parameters
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if not c3_max > 0.0:
        raise InvalidParameterError(f"c3_max must be positive, got {c3_max}")

    best_beta, best = -math.inf, None
    for c3 in np.geomspace(c3_max / C3_GRID_SPAN, c3_max, C3_GRID_POINTS):
        c3 = float(c3)
        for tau0, nu0 in _seeds(c3, alpha):
            res = minimize(
                lambda x: -_certified_beta(kind, c3, x[0], x[1], alpha),
                np.array([tau0, nu0]),
                method='Nelder-Mead',
                bounds=[(None, None), (0.0, None)],
                options=dict(xatol=1e-10, fatol=1e-13, maxfev=2000),
            )
            beta = -float(res.fun)
            if beta > best_beta:
                best_beta, best = beta, (c3, float(res.x[0]), float(res.x[1]))

    if best is None or not best_beta > 0.0:
        c3, tau, nu = best or (c3_max, 0.0, 0.0)
        params = _params(c3, tau, nu, alpha)
        margin = q0_coefficients(kind, params)[0]
        logger.warning(f"q0 {kind.value}: nothing certified at alpha={alpha}, c3_max={c3_max}")
        return Q0Threshold(alpha=alpha, kind=kind, c3_max=c3_max, beta=0.0, margin=margin, params=params)

    beta = min(best_beta, 1.0 - 1e-12) * (1.0 - MARGIN_SHRINK)
    c3, tau, nu = best
    params = _params(c3, tau, nu, alpha, beta)
    c0, c1 = q0_coefficients(kind, params)
    margin = c0 + beta * c1
    logger.info(f"q0 {kind.value}: alpha={alpha:.4g} c3_max={c3_max:.3g} -> beta*={beta:.6f} (c3={c3:.4g})")
    return Q0Threshold(alpha=alpha, kind=kind, c3_max=c3_max, beta=beta, margin=margin, params=params)
