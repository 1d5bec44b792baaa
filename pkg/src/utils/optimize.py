"""
Optimization Helpers
Golden-section line search, coarse-scan bracketing and multi-start Nelder-Mead
used by the nested exponent minimization.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize


logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float,
                   max_iter: int = 200) -> Dict[str, Any]:
    """
    Minimize a unimodal f on [lo, hi].

    Returns:
        Dict with argmin, minimum, converged and evaluations
    """
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    evaluations = 2
    iteration = 0
    while iteration < max_iter and hi - lo > tol:
        if f2 > f1:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        evaluations += 1
        iteration += 1

    argmin, minimum = (x1, f1) if f1 <= f2 else (x2, f2)
    return dict(
        argmin=argmin,
        minimum=minimum,
        converged=iteration < max_iter and not (math.isnan(f1) or math.isnan(f2)),
        evaluations=evaluations,
    )


def scan_then_golden(f: Callable[[float], float], lo: float, hi: float, points: int, tol: float,
                     stop_below: Optional[float] = None) -> Dict[str, Any]:
    """
    Minimize f over [lo, hi] on a log scale: coarse geometric scan, then golden
    section in log-coordinates around the best scan point.

    If stop_below is given the search returns as soon as a value under it is seen.
    """
    grid = np.geomspace(lo, hi, points)
    values: List[float] = []
    for x in grid:
        v = f(float(x))
        values.append(v)
        if stop_below is not None and v < stop_below:
            return dict(argmin=float(x), minimum=v, converged=True, evaluations=len(values), stopped=True)

    best = int(np.argmin(values))
    result = dict(argmin=float(grid[best]), minimum=values[best], converged=True,
                  evaluations=len(values), stopped=False)
    if not math.isfinite(values[best]):
        result['converged'] = False
        return result

    left = math.log(grid[max(best - 1, 0)])
    right = math.log(grid[min(best + 1, points - 1)])
    line = golden_section(lambda t: f(math.exp(t)), left, right, tol)
    result['evaluations'] += line['evaluations']
    if line['minimum'] < result['minimum']:
        result.update(argmin=math.exp(line['argmin']), minimum=line['minimum'],
                      converged=line['converged'])
    return result


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    simplex = [x0]
    for i in range(len(x0)):
        vertex = x0.copy()
        vertex[i] += max(0.25 * abs(x0[i]), 0.1)
        simplex.append(vertex)
    return np.array(simplex)


def multistart_nelder_mead(objective: Callable[[np.ndarray], float], seeds: Sequence[np.ndarray],
                           lower: Sequence[float], max_evals: int, xatol: float,
                           fatol: float) -> Dict[str, Any]:
    """
    Run bounded Nelder-Mead from every seed and keep the best end point.

    Args:
        objective: Function of the variable vector; +inf marks infeasible points
        seeds: Starting points, each inside the bounds
        lower: Lower bound per coordinate (no upper bounds)
        max_evals: Function-evaluation cap per start
        xatol: Simplex size tolerance
        fatol: Function value tolerance

    Returns:
        Dict with x, fun, converged (of the winning start) and evaluations
    """
    bounds = [(lb, None) for lb in lower]
    best: Dict[str, Any] = dict(x=np.asarray(seeds[0], dtype=float), fun=math.inf,
                                converged=False, evaluations=0)
    total_evals = 0
    for seed in seeds:
        x0 = np.maximum(np.asarray(seed, dtype=float), np.asarray(lower, dtype=float))
        res = minimize(
            objective,
            x0,
            method='Nelder-Mead',
            bounds=bounds,
            options=dict(maxfev=max_evals, xatol=xatol, fatol=fatol,
                         initial_simplex=_initial_simplex(x0)),
        )
        total_evals += int(res.nfev)
        if res.fun < best['fun']:
            best = dict(x=np.asarray(res.x, dtype=float), fun=float(res.fun),
                        converged=bool(res.success), evaluations=0)
    best['evaluations'] = total_evals
    if not best['converged']:
        logger.debug(f"Nelder-Mead best start did not converge (fun={best['fun']:.6g})")
    return best
