"""Test doubles."""

from src.models.state import ConditionValue, LiftParams


def linear_condition(root, calls=None):
    """Stand-in for exponents.condition: value = beta - root, root a number or f(kind, alpha, mode)."""
    def fake(kind, alpha, beta, q, mode, spec, settings=None, warm_start=None, sign_only=False):
        if calls is not None:
            calls.append(dict(beta=beta, warm_start=warm_start, mode=mode, sign_only=sign_only))
        r = root(kind, alpha, mode) if callable(root) else root
        return ConditionValue(value=beta - r, argmin=LiftParams(c3=0.1, gamma=1.0 + beta), mode=mode,
                              flags=('sign_only',) if sign_only else ())
    return fake
