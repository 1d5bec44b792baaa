"""
q = 1 Closed Forms
Exact limit-mode conditions for l1 recovery, used as oracles for the general
pipeline and as the reference curve for the Monte Carlo bracket.
"""

import math

from scipy.optimize import brentq, minimize_scalar
from scipy.stats import norm

from src.models.errors import InvalidParameterError


NU_SEARCH_MAX = 20.0


def _check(alpha: float, beta: float):
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 <= beta <= 1.0:
        raise InvalidParameterError(f"beta must lie in [0, 1], got {beta}")


def folded_plus_second_moment(nu: float) -> float:
    """E(|h| + nu)^2 = 1 + 2 nu sqrt(2/pi) + nu^2."""
    return 1.0 + 2.0 * nu * math.sqrt(2.0 / math.pi) + nu * nu


def folded_excess_second_moment(nu: float) -> float:
    """E(|h| - nu)_+^2 = 2 [(1 + nu^2) P(h > nu) - nu phi(nu)]."""
    return 2.0 * ((1.0 + nu * nu) * norm.sf(nu) - nu * norm.pdf(nu))


def _min_sqrt(quadratic) -> float:
    res = minimize_scalar(lambda nu: math.sqrt(quadratic(nu)), bounds=(0.0, NU_SEARCH_MAX),
                          method='bounded', options=dict(xatol=1e-12))
    return float(min(res.fun, math.sqrt(quadratic(0.0))))


def sectional_l1_limit(alpha: float, beta: float) -> float:
    """min over nu of sqrt(beta E(|h|+nu)^2 + (1-beta) E(|h|-nu)_+^2) - sqrt(alpha)."""
    _check(alpha, beta)
    return _min_sqrt(
        lambda nu: beta * folded_plus_second_moment(nu) + (1.0 - beta) * folded_excess_second_moment(nu)
    ) - math.sqrt(alpha)


def weak_l1_limit(alpha: float, beta: float) -> float:
    """min over nu of sqrt(beta (1 + nu^2) + (1-beta) E(|h|-nu)_+^2) - sqrt(alpha)."""
    _check(alpha, beta)
    return _min_sqrt(
        lambda nu: beta * (1.0 + nu * nu) + (1.0 - beta) * folded_excess_second_moment(nu)
    ) - math.sqrt(alpha)


def weak_l1_threshold(alpha: float) -> float:
    """Largest beta with weak_l1_limit(alpha, beta) < 0."""
    _check(alpha, 0.0)
    return float(brentq(lambda b: weak_l1_limit(alpha, b), 1e-9, alpha, xtol=1e-12))


def sectional_l1_threshold(alpha: float) -> float:
    """Largest beta with sectional_l1_limit(alpha, beta) < 0."""
    _check(alpha, 0.0)
    return float(brentq(lambda b: sectional_l1_limit(alpha, b), 1e-9, alpha, xtol=1e-12))
