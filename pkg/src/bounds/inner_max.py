"""
Inner Maximization Kernels
Per-coordinate maximizations over w (and the strong-case sign b) used inside every
expectation integrand.

The *_values functions are vectorized over h and are what the quadrature calls;
max_plus, max_minus, max_q_half, max_strong and max_weak_support are the scalar
entry points returning InnerMaxResult.
"""

import math
from typing import Callable, Tuple

import numpy as np

from src.models.errors import InvalidParameterError
from src.models.state import (
    Branch,
    InnerMaxResult,
    ScalarProblem,
    SignMode,
    check_scalar_params,
)


_BISECTION_STEPS = 200
_REL_EPS = 4e-16
# stand-in maximizer for a supremum approached as w -> 0+; its square underflows
_RIGHT_OF_ZERO = 1e-200

AT_ZERO, INTERIOR_POS, INTERIOR_NEG = 0, 1, 2
_BRANCHES = {AT_ZERO: Branch.AT_ZERO, INTERIOR_POS: Branch.INTERIOR_POS, INTERIOR_NEG: Branch.INTERIOR_NEG}

Values = Tuple[np.ndarray, np.ndarray, np.ndarray]


def abs_power(w, q: float) -> np.ndarray:
    """|w|^q with the counting convention |0|^0 = 0."""
    a = np.abs(np.asarray(w, dtype=float))
    if q == 0.0:
        return (a > 0.0).astype(float)
    return a ** q


def search_upper_bound(h, q: float, nu: float, gamma: float) -> np.ndarray:
    """Upper end of the w-interval; the -gamma w^2 term dominates beyond it."""
    return (np.abs(h) + nu * max(1.0, q) + 1.0) / gamma + 1.0


def _bisect(derivative: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Elementwise root of a derivative that is positive at lo and negative at hi."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        positive = derivative(mid) > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
        if np.all(hi - lo <= _REL_EPS * hi):
            break
    return 0.5 * (lo + hi)


def q_half_values(h, nu: float, gamma: float, sign: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized q = 1/2 maximum of h w + sign nu sqrt(w) - gamma w^2 over w >= 0.

    With s = sqrt(w) the stationary points solve s^3 + p s + r = 0 with
    p = -h/(2 gamma) and r = -sign nu/(4 gamma). The largest real root is the
    only candidate: for sign = +1 it is the unique positive root, for sign = -1
    it is the local maximum and competes with w = 0.

    Returns:
        (w*, value)
    """
    h = np.asarray(h, dtype=float)
    p = -h / (2.0 * gamma)
    r = -sign * nu / (4.0 * gamma)
    disc = (0.5 * r) ** 2 + (p / 3.0) ** 3
    three_real = disc <= 0.0

    sq = np.sqrt(np.maximum(disc, 0.0))
    cardano = np.cbrt(-0.5 * r + sq) + np.cbrt(-0.5 * r - sq)
    safe_p = np.where(three_real, p, -1.0)
    arg = np.clip((1.5 * r / safe_p) * np.sqrt(-3.0 / safe_p), -1.0, 1.0)
    trig = 2.0 * np.sqrt(-safe_p / 3.0) * np.cos(np.arccos(arg) / 3.0)
    s = np.where(three_real, trig, cardano)

    slope = 3.0 * s * s + p
    s = np.where(slope > 0.0, s - (s ** 3 + p * s + r) / np.where(slope > 0.0, slope, 1.0), s)
    s = np.maximum(s, 0.0)
    w = s * s
    value = h * w + sign * nu * s - gamma * w * w
    if sign > 0.0:
        return w, np.maximum(value, 0.0)
    win = three_real & (value > 0.0)
    return np.where(win, w, 0.0), np.where(win, value, 0.0)


def plus_root_values(h, q: float, nu: float, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bisection maximizer of h w + nu w^q - gamma w^2 for 0 < q < 1; returns (w*, value)."""
    h = np.asarray(h, dtype=float)
    hi = search_upper_bound(h, q, nu, gamma)
    w = _bisect(lambda x: h + q * nu * x ** (q - 1.0) - 2.0 * gamma * x, np.zeros_like(hi), hi)
    return w, np.maximum(h * w + nu * w ** q - gamma * w * w, 0.0)


def minus_root_values(h, q: float, nu: float, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bisection maximizer of h w - nu w^q - gamma w^2 for 0 < q < 1; returns (w*, value)."""
    h = np.asarray(h, dtype=float)
    # the derivative h - q nu w^(q-1) - 2 gamma w rises up to w_c and falls after it
    w_c = (q * (1.0 - q) * nu / (2.0 * gamma)) ** (1.0 / (2.0 - q))
    d_c = h - q * nu * w_c ** (q - 1.0) - 2.0 * gamma * w_c
    has_max = d_c > 0.0
    hi = search_upper_bound(h, q, nu, gamma)
    lo = np.full_like(hi, w_c)
    root = _bisect(lambda x: h - q * nu * x ** (q - 1.0) - 2.0 * gamma * x,
                   lo, np.where(has_max, hi, lo))
    interior = h * root - nu * root ** q - gamma * root * root
    win = has_max & (interior > 0.0)
    return np.where(win, root, 0.0), np.where(win, interior, 0.0)


def plus_values(h, q: float, nu: float, gamma: float) -> Values:
    """max over w >= 0 of h w + nu w^q - gamma w^2 for h >= 0 (vectorized)."""
    h = np.asarray(h, dtype=float)
    if nu == 0.0 or q == 1.0:
        a = h + nu if q == 1.0 else h
        a = np.maximum(a, 0.0)
        w = a / (2.0 * gamma)
        value = a * a / (4.0 * gamma)
    elif q == 0.0:
        # supremum, approached as w -> 0+ when h = 0
        w = np.maximum(h / (2.0 * gamma), _RIGHT_OF_ZERO)
        value = h * w + nu - gamma * w * w
    elif q == 0.5:
        w, value = q_half_values(h, nu, gamma, 1.0)
    else:
        w, value = plus_root_values(h, q, nu, gamma)
    branch = np.where(w > 0.0, INTERIOR_POS, AT_ZERO)
    return w, value, branch


def minus_values(h, q: float, nu: float, gamma: float) -> Values:
    """max over w >= 0 of h w - nu w^q - gamma w^2 for h >= 0 (vectorized)."""
    h = np.asarray(h, dtype=float)
    if nu == 0.0 or q == 1.0:
        a = np.maximum(h - nu if q == 1.0 else h, 0.0)
        w = a / (2.0 * gamma)
        value = a * a / (4.0 * gamma)
    elif q == 0.0:
        interior = h * h / (4.0 * gamma) - nu
        win = interior > 0.0
        w = np.where(win, h / (2.0 * gamma), 0.0)
        value = np.where(win, interior, 0.0)
    elif q == 0.5:
        w, value = q_half_values(h, nu, gamma, -1.0)
    else:
        w, value = minus_root_values(h, q, nu, gamma)
    branch = np.where(w > 0.0, INTERIOR_POS, AT_ZERO)
    return w, value, branch


def strong_values(h, q: float, nu1: float, nu2: float, gamma: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """max over b in {+1, -1} and w >= 0 of h w - nu1 b w^q - gamma w^2 + nu2 b."""
    w_m, v_m, br_m = minus_values(h, q, nu1, gamma)
    w_p, v_p, br_p = plus_values(h, q, nu1, gamma)
    v_m = v_m + nu2
    v_p = v_p - nu2
    take_plus_b = (v_m > v_p) | ((v_m == v_p) & (w_m <= w_p))
    w = np.where(take_plus_b, w_m, w_p)
    value = np.where(take_plus_b, v_m, v_p)
    branch = np.where(take_plus_b, br_m, br_p)
    sign_b = np.where(take_plus_b, 1, -1)
    return w, value, branch, sign_b


def weak_support_values(h, q: float, nu: float, gamma: float, mu: float) -> Values:
    """max over w of h w - nu|mu + w|^q + nu mu^q - gamma w^2 for signed h.

    With t = mu + w the maximizer is that of a max_minus problem in |t| with
    linear coefficient |h + 2 gamma mu|; the sign of h + 2 gamma mu decides
    whether the winning t is positive or negative. The value is evaluated
    back in w, since in t it is a difference of two O(gamma mu^2) terms.
    """
    h = np.asarray(h, dtype=float)
    shifted = h + 2.0 * gamma * mu
    t_mag, _, _ = minus_values(np.abs(shifted), q, nu, gamma)
    t = np.sign(shifted) * t_mag
    w = t - mu
    value = h * w - gamma * w * w - nu * power_gap(t_mag - mu, mu, q)
    branch = np.where(t > 0.0, INTERIOR_POS, np.where(t < 0.0, INTERIOR_NEG, AT_ZERO))
    return w, value, branch


def power_gap(d, mu: float, q: float) -> np.ndarray:
    """(mu + d)^q - mu^q for d >= -mu, without cancellation when |d| << mu."""
    d = np.asarray(d, dtype=float)
    if q == 1.0:
        return d
    if mu == 0.0:
        return abs_power(d, q)
    if q == 0.0:
        return (mu + d > 0.0).astype(float) - 1.0
    with np.errstate(divide='ignore'):
        return mu ** q * np.expm1(q * np.log1p(np.maximum(d / mu, -1.0)))


def weak_support_limit_values(h, q: float, nu: float, gamma: float) -> Values:
    """Weak on-support maximum as mu -> infinity."""
    h = np.asarray(h, dtype=float)
    a = h - nu if q == 1.0 else h
    w = a / (2.0 * gamma)
    branch = np.where(w > 0.0, INTERIOR_POS, np.where(w < 0.0, INTERIOR_NEG, AT_ZERO))
    return w, a * a / (4.0 * gamma), branch


def _scalar(w, value, branch, sign_b=None) -> InnerMaxResult:
    return InnerMaxResult(
        w_star=float(w),
        value=float(value),
        branch=_BRANCHES[int(branch)],
        sign_b=None if sign_b is None else int(sign_b),
    )


def max_plus(p: ScalarProblem) -> InnerMaxResult:
    """
    Global max over w >= 0 of h w + nu w^q - gamma w^2.

    Args:
        p: Scalar problem with sign_mode PLUS and mu = 0

    Returns:
        InnerMaxResult with the maximizer and the maximum
    """
    if p.sign_mode is not SignMode.PLUS or p.mu != 0.0:
        raise InvalidParameterError("max_plus needs sign_mode=plus and mu=0")
    return _scalar(*plus_values(p.h_mag, p.q, p.nu, p.gamma))


def max_minus(p: ScalarProblem) -> InnerMaxResult:
    """
    Global max over w >= 0 of h w - nu w^q - gamma w^2 (always >= 0).

    Args:
        p: Scalar problem with sign_mode MINUS and mu = 0

    Returns:
        InnerMaxResult with the maximizer and the maximum
    """
    if p.sign_mode is not SignMode.MINUS or p.mu != 0.0:
        raise InvalidParameterError("max_minus needs sign_mode=minus and mu=0")
    return _scalar(*minus_values(p.h_mag, p.q, p.nu, p.gamma))


def cubic_real_roots(p: float, r: float) -> Tuple[float, ...]:
    """Real roots of s^3 + p s + r = 0, each polished by one Newton step."""
    if p == 0.0:
        roots = [math.copysign(abs(r) ** (1.0 / 3.0), -r)]
    else:
        disc = (r / 2.0) ** 2 + (p / 3.0) ** 3
        if disc > 0.0:
            sq = math.sqrt(disc)
            u = np.cbrt(-r / 2.0 + sq)
            v = np.cbrt(-r / 2.0 - sq)
            roots = [float(u + v)]
        else:
            radius = 2.0 * math.sqrt(-p / 3.0)
            arg = (3.0 * r / (2.0 * p)) * math.sqrt(-3.0 / p)
            theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
            roots = [radius * math.cos(theta - 2.0 * math.pi * j / 3.0) for j in range(3)]

    polished = []
    for s in roots:
        slope = 3.0 * s * s + p
        if slope != 0.0:
            s = s - (s ** 3 + p * s + r) / slope
        polished.append(s)
    return tuple(polished)


def max_q_half(p: ScalarProblem) -> InnerMaxResult:
    """
    Closed-form maximization at q = 1/2.

    With s = sqrt(w) the stationary condition h s +- nu/2 - 2 gamma s^3 = 0 is a
    cubic; the best of its nonnegative real roots and w = 0 wins.
    """
    if p.q != 0.5:
        raise InvalidParameterError(f"max_q_half needs q = 0.5, got {p.q}")
    if p.mu != 0.0:
        raise InvalidParameterError("max_q_half needs mu = 0")
    sign = 1.0 if p.sign_mode is SignMode.PLUS else -1.0
    h, nu, gamma = p.h_mag, p.nu, p.gamma

    best_w, best_value = 0.0, 0.0
    for s in cubic_real_roots(-h / (2.0 * gamma), -sign * nu / (4.0 * gamma)):
        if s < 0.0:
            continue
        w = s * s
        value = h * w + sign * nu * s - gamma * w * w
        if value > best_value or (value == best_value and w < best_w):
            best_w, best_value = w, value
    branch = Branch.INTERIOR_POS if best_w > 0.0 else Branch.AT_ZERO
    return InnerMaxResult(w_star=best_w, value=best_value, branch=branch)


def max_strong(h_mag: float, q: float, nu1: float, nu2: float, gamma: float) -> InnerMaxResult:
    """
    Strong-case maximum over w and b in {+1, -1}.

    b = +1 pairs max_minus with +nu2, b = -1 pairs max_plus with -nu2; sign_b
    records the winner.
    """
    check_scalar_params(q, nu1, gamma)
    if nu2 < 0.0 or h_mag < 0.0:
        raise InvalidParameterError("max_strong needs nu2 >= 0 and h_mag >= 0")
    return _scalar(*strong_values(h_mag, q, nu1, nu2, gamma))


def max_weak_support(h: float, q: float, nu: float, gamma: float, mu: float) -> InnerMaxResult:
    """
    Weak on-support maximum over w of h w - nu|mu + w|^q + nu mu^q - gamma w^2.

    Args:
        h: Signed standard normal realization
        q: Exponent in [0, 1]
        nu: Penalty weight
        gamma: Quadratic weight
        mu: Support magnitude, or math.inf for the mu -> infinity probe

    Returns:
        InnerMaxResult with w* relative to the support value
    """
    check_scalar_params(q, nu, gamma)
    if mu < 0.0:
        raise InvalidParameterError(f"mu must be nonnegative, got {mu}")
    if math.isinf(mu):
        return _scalar(*weak_support_limit_values(h, q, nu, gamma))
    return _scalar(*weak_support_values(h, q, nu, gamma, mu))
