"""
Sphere Exponent
Closed-form contribution of the unit-sphere minimization, shared by the
sectional, strong and weak conditions.
"""

import math

from src.models.errors import InvalidParameterError
from src.models.state import SphereExponent


def _check(c3: float, alpha: float):
    if not c3 > 0.0:
        raise InvalidParameterError(f"c3 must be positive, got {c3}")
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")


def i_sph(c3: float, alpha: float) -> SphereExponent:
    """
    Sphere exponent at lifting parameter c3.

    gamma_hat = (2 c3 - sqrt(4 c3^2 + 16 alpha)) / 8, written without the
    subtraction so that large c3 keeps full precision; the value is
    gamma_hat - alpha / (2 c3) * log(1 - c3 / (2 gamma_hat)).
    """
    _check(c3, alpha)
    gamma_hat = -2.0 * alpha / (2.0 * c3 + math.sqrt(4.0 * c3 * c3 + 16.0 * alpha))
    value = gamma_hat - alpha / (2.0 * c3) * math.log1p(-c3 / (2.0 * gamma_hat))
    return SphereExponent(gamma_hat=gamma_hat, value=value)


def i_sph_limit(alpha: float) -> float:
    """c3 -> 0 sphere term, -sqrt(alpha)."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
    return -math.sqrt(alpha)


def i_sph_asymptotic(c3: float, alpha: float) -> float:
    """Large-c3 form -alpha/(2 c3) - alpha/(2 c3) log(1 + c3^2/alpha)."""
    _check(c3, alpha)
    scale = alpha / (2.0 * c3)
    return -scale - scale * math.log1p(c3 * c3 / alpha)
