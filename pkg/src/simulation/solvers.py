"""
Recovery Solvers
l1 minimization by linear programming, smoothed-lq IRLS and the null-space
condition probe used by the Monte Carlo harness.
"""

import logging
import math
from typing import Optional

import numpy as np
import scipy.linalg as scilin
from scipy.optimize import linprog, minimize

from src.models.errors import InvalidParameterError, NumericalFailureError, RankDeficiencyError
from src.models.state import ThresholdKind


logger = logging.getLogger(__name__)

DUALITY_GAP_TOL = 1e-8
FEASIBILITY_TOL = 1e-10
VIOLATION_TOL = 1e-10


def solve_l1(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    min ||x||_1 subject to A x = y.

    Split x = u - v with u, v >= 0 and solve the LP
        min 1'(u + v)  s.t.  [A, -A] [u; v] = y
    with HiGHS dual simplex. Optimality is checked through the duality gap
    |c'z - y'lambda| from the equality marginals.

    Raises:
        NumericalFailureError: solver failure or duality gap above 1e-8 (relative)
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if not np.any(y):
        return np.zeros(n)

    c = np.ones(2 * n)
    result = linprog(
        c,
        A_eq=np.hstack([A, -A]),
        b_eq=y,
        bounds=(0, None),
        method='highs-ds',
        options=dict(primal_feasibility_tolerance=1e-10, dual_feasibility_tolerance=1e-10),
    )
    if not result.success:
        raise NumericalFailureError(f"l1 LP failed: {result.message}")

    dual_value = float(y @ result.eqlin.marginals)
    gap = abs(result.fun - dual_value)
    if gap > DUALITY_GAP_TOL * max(1.0, abs(result.fun)):
        raise NumericalFailureError(f"l1 LP duality gap {gap:.3e} exceeds tolerance")

    z = result.x
    return z[:n] - z[n:]


def _least_norm_correction(A_pinv: np.ndarray, A: np.ndarray, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    return x + A_pinv @ (y - A @ x)


def _weighted_least_norm(A: np.ndarray, y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # argmin sum x_i^2 / w_i s.t. Ax = y, via the scaled min-norm problem
    d = np.sqrt(weights)
    z = scilin.lstsq(A * d, y, lapack_driver='gelsd')[0]
    return d * z


def smoothed_lq(x: np.ndarray, q: float, eps: float) -> float:
    return float(np.sum((x * x + eps) ** (0.5 * q)))


def solve_irls_lq(A: np.ndarray, y: np.ndarray, q: float, restarts: int = 1,
                  x0: Optional[np.ndarray] = None, eps0: Optional[float] = None,
                  rng: Optional[np.random.Generator] = None, eps_min: float = 1e-12,
                  max_iter: int = 500) -> np.ndarray:
    """
    Heuristic local minimizer of sum |x_i|^q subject to A x = y.

    Each restart runs IRLS on the smoothed objective sum (x_i^2 + eps)^{q/2}
    with weights (x_i^2 + eps)^{1 - q/2}; eps starts at eps0 and drops tenfold
    whenever the iterate moves by less than sqrt(eps)/100, until eps_min.
    The first start is x0 (or the least-norm solution); later starts add a
    random null-space component. Every iterate is projected back onto Ax = y.

    Args:
        A: m x n system matrix
        y: Measurements
        q: Exponent in (0, 1]
        restarts: Number of starts; the lowest smoothed objective wins
        x0: Optional first start
        eps0: Initial smoothing (default 1)
        rng: Generator for the random starts
        eps_min: Final smoothing level
        max_iter: Iteration cap per start

    Returns:
        Best feasible iterate
    """
    if not 0.0 < q <= 1.0:
        raise InvalidParameterError(f"IRLS needs q in (0, 1], got {q}")
    if restarts < 1:
        raise InvalidParameterError(f"restarts must be >= 1, got {restarts}")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = rng or np.random.default_rng(0)
    A_pinv = scilin.pinv(A)
    x_ln = A_pinv @ y
    scale = max(1.0, float(np.max(np.abs(x_ln)))) if x_ln.size else 1.0

    best_x, best_obj = x_ln, math.inf
    for start in range(restarts):
        if start == 0:
            x = np.asarray(x0, dtype=float) if x0 is not None else x_ln.copy()
        else:
            g = rng.standard_normal(A.shape[1]) * scale
            x = x_ln + (g - A_pinv @ (A @ g))
        x = _least_norm_correction(A_pinv, A, y, x)
        eps = 1.0 if eps0 is None else eps0

        converged = False
        for _ in range(max_iter):
            weights = (x * x + eps) ** (1.0 - 0.5 * q)
            x_new = _least_norm_correction(A_pinv, A, y, _weighted_least_norm(A, y, weights))
            step = float(np.linalg.norm(x_new - x))
            x = x_new
            if step < math.sqrt(eps) / 100.0:
                if eps <= eps_min:
                    converged = True
                    break
                eps = max(eps / 10.0, eps_min)

        if not converged:
            logger.debug(f"IRLS start {start} stopped at eps={eps:.1e} without settling")
        objective = smoothed_lq(x, q, eps_min)
        if objective < best_obj:
            best_x, best_obj = x, objective

    residual = float(np.linalg.norm(A @ best_x - y))
    if residual > FEASIBILITY_TOL * max(1.0, float(np.linalg.norm(y))):
        logger.warning(f"IRLS iterate infeasible: |Ax - y| = {residual:.3e}")
    return best_x


def nullspace_basis(A: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Orthonormal basis of ker(A), obtained by projecting a random n x (n - m)
    complement onto the null space and orthogonalizing it.

    Raises:
        RankDeficiencyError: A does not have full row rank
    """
    m, n = A.shape
    if np.linalg.matrix_rank(A) < min(m, n):
        raise RankDeficiencyError(f"system matrix of shape {A.shape} is rank deficient")
    d = n - m
    if d <= 0:
        raise RankDeficiencyError("null space is trivial")
    G = rng.standard_normal((n, d))
    G -= scilin.pinv(A) @ (A @ G)
    Z, R = scilin.qr(G, mode='economic')
    if np.min(np.abs(np.diag(R))) < 1e-10:
        raise RankDeficiencyError("random complement lost rank after projection")
    return Z


def _lq_mass(w: np.ndarray, q: float) -> np.ndarray:
    a = np.abs(w)
    if q == 0.0:
        return (a > 0.0).astype(float)
    return a ** q


def condition_gap(w: np.ndarray, kind: ThresholdKind, q: float, k: int,
                  x_tilde: Optional[np.ndarray] = None) -> float:
    """
    Signed slack of the null-space condition at w; values <= 0 are violations.

    sectional: sum off the last k of |w|^q minus sum on them
    strong: same with the k largest |w_i| as support
    weak: sum_S |x_i + w_i|^q - |x_i|^q + sum_{S^c} |w_i|^q, S the last k
    """
    n = w.shape[0]
    if kind is ThresholdKind.STRONG:
        mass = np.sort(_lq_mass(w, q))
        return float(np.sum(mass[:n - k]) - np.sum(mass[n - k:]))
    if kind is ThresholdKind.SECTIONAL:
        mass = _lq_mass(w, q)
        return float(np.sum(mass[:n - k]) - np.sum(mass[n - k:]))
    x_s = x_tilde[n - k:]
    on = _lq_mass(x_s + w[n - k:], q) - _lq_mass(x_s, q)
    return float(np.sum(_lq_mass(w[:n - k], q)) + np.sum(on))


def _violated(gap: float, w: np.ndarray, q: float) -> bool:
    return gap <= -VIOLATION_TOL * (1.0 + float(np.sum(_lq_mass(w, q))))


def nullspace_probe(A: np.ndarray, kind: ThresholdKind, q: float, k: int, probes: int = 100,
                    rng: Optional[np.random.Generator] = None,
                    x_tilde: Optional[np.ndarray] = None) -> float:
    """
    Fraction of random starts whose local search finds a null-space vector
    violating the sufficient condition of the given kind.

    A violation proves the condition fails for A; a zero fraction is evidence
    only. The weak kind searches w freely (scale included) against x_tilde,
    which defaults to unit magnitudes on the last k coordinates.

    Raises:
        RankDeficiencyError: A is rank deficient (regenerate the instance)
    """
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q}")
    if probes < 1:
        raise InvalidParameterError(f"probes must be >= 1, got {probes}")
    m, n = A.shape
    if k < 0 or k >= n:
        raise InvalidParameterError(f"support size k={k} out of range for n={n}")
    rng = rng or np.random.default_rng(0)
    Z = nullspace_basis(np.asarray(A, dtype=float), rng)
    if k == 0:
        return 0.0

    if kind is ThresholdKind.WEAK:
        if x_tilde is None:
            x_tilde = np.zeros(n)
            x_tilde[n - k:] = 1.0
        scale = float(np.max(np.abs(x_tilde[n - k:]))) or 1.0

        def gap_of(c):
            w = Z @ c
            return condition_gap(w, kind, q, k, x_tilde), w
    else:
        def gap_of(c):
            w = Z @ c
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return math.inf, w
            w = w / norm
            return condition_gap(w, kind, q, k), w

    d = Z.shape[1]
    if d == 1:
        if kind is ThresholdKind.WEAK:
            ts = np.concatenate([-np.geomspace(1e-6, 1e3, 400), np.geomspace(1e-6, 1e3, 400)]) * scale
        else:
            ts = np.array([-1.0, 1.0])
        found = any(_violated(*gap_of(np.array([t])), q) for t in ts)
        return 1.0 if found else 0.0

    violations = 0
    for _ in range(probes):
        c0 = rng.standard_normal(d)
        if kind is ThresholdKind.WEAK:
            c0 *= scale * 10.0 ** rng.uniform(-2.0, 1.0) / math.sqrt(d)
        if _violated(*gap_of(c0), q):
            violations += 1
            continue
        res = minimize(lambda c: gap_of(c)[0], c0, method='Nelder-Mead',
                       options=dict(maxfev=100 * d, xatol=1e-8, fatol=1e-12))
        if _violated(*gap_of(res.x), q):
            violations += 1
    return violations / probes
