"""
Threshold Solver
Bisection for the largest certified beta*(alpha) and curve sweeps over
(q, alpha) grids.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.bounds.exponents import condition
from src.models.errors import InvalidParameterError
from src.models.state import (
    BetaSolution,
    ConditionValue,
    CurvePoint,
    CurveRequest,
    LiftParams,
    Mode,
    QuadratureSpec,
    SearchSettings,
    ThresholdKind,
)


def beta_ceiling(kind: ThresholdKind, alpha: float) -> float:
    """Upper end of the bisection bracket: alpha/2, or alpha for the weak kind."""
    if kind is ThresholdKind.WEAK:
        return min(alpha, 1.0 - 1e-9)
    return alpha / 2.0


class ThresholdSolver:
    """
    Finds beta*(alpha) for one threshold kind and evaluates curve sweeps.

    Responsibilities:
    - Bisection on beta with warm-started condition evaluations
    - Monotonicity probes and the fine rescan fallback
    - Per-point bookkeeping of residuals, argmins and flags
    """

    def __init__(self, spec: Optional[QuadratureSpec] = None, settings: Optional[SearchSettings] = None):
        """
        Initialize the solver.

        Args:
            spec: Quadrature resolution shared by every condition evaluation
            settings: Optimizer, search and bisection knobs
        """
        self.spec = spec or QuadratureSpec()
        self.settings = settings or SearchSettings()
        self.logger = logging.getLogger(__name__)

    def _evaluator(self, kind: ThresholdKind, alpha: float, q: float, mode: Mode):
        history: Dict[float, ConditionValue] = {}
        warm: List[Optional[LiftParams]] = [None]

        def evaluate(beta: float, sign_only: bool = True, cold: bool = False) -> ConditionValue:
            if sign_only and beta in history:
                return history[beta]
            value = condition(kind, alpha, beta, q, mode, self.spec, self.settings,
                              warm_start=None if cold else warm[0], sign_only=sign_only)
            if value.argmin is not None:
                warm[0] = value.argmin
            history[beta] = value
            return value

        return evaluate, history

    def _rescan(self, evaluate, lo: float, hi: float) -> float:
        """Largest grid beta below which every grid point certifies."""
        certified = 0.0
        for beta in np.arange(lo, hi + 0.5 * self.settings.rescan_step, self.settings.rescan_step):
            beta = float(min(beta, hi))
            if not evaluate(beta).certified:
                break
            certified = beta
        return certified

    def solve_beta(self, kind: ThresholdKind, alpha: float, q: float, mode: Mode,
                   beta_tol: float = 1e-4, beta_lo: Optional[float] = None) -> BetaSolution:
        """
        Largest beta with condition < 0, to within beta_tol.

        Args:
            kind: Threshold notion
            alpha: Measurement ratio in (0, 1]
            q: Exponent in [0, 1]
            mode: LIFTED or LIMIT
            beta_tol: Bracket width at which bisection stops
            beta_lo: Known certified lower end (defaults to the configured floor)

        Returns:
            BetaSolution; beta = 0 with flag 'uncertified_at_lower' when even the
            lower end fails, beta at the ceiling with 'bracket_failure' when the
            upper end certifies, 'warm_start_disagreement' when the full
            evaluation at the final lower end contradicts the sign-only pass
        """
        if not 0.0 < alpha <= 1.0:
            raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha}")
        if beta_tol <= 0.0:
            raise InvalidParameterError(f"beta_tol must be positive, got {beta_tol}")

        floor = self.settings.beta_floor
        ceiling = beta_ceiling(kind, alpha)
        solution = BetaSolution(beta=0.0, kind=kind, alpha=alpha, q=q, mode=mode)
        if ceiling <= floor:
            solution.flags.append('empty_bracket')
            return solution

        evaluate, history = self._evaluator(kind, alpha, q, mode)
        lo = max(floor, beta_lo) if beta_lo else floor
        lo = min(lo, ceiling)

        at_lo = evaluate(lo)
        if not at_lo.certified:
            if lo > floor:
                # the supplied lower end is not certified here; fall back to the floor
                lo = floor
                at_lo = evaluate(lo)
            if not at_lo.certified:
                solution.flags.append('uncertified_at_lower')
                solution.residual_above = evaluate(lo, sign_only=False).value
                solution.evaluations = len(history)
                self.logger.info(f"{kind.value} {mode.value} alpha={alpha:.4g} q={q:.3g}: nothing certified")
                return solution

        hi = ceiling
        at_hi = evaluate(hi)
        if at_hi.certified:
            solution.flags.append('bracket_failure')
            solution.beta = hi
            full = evaluate(hi, sign_only=False)
            solution.residual_below = full.value
            solution.argmin = full.argmin
            solution.evaluations = len(history)
            self.logger.warning(
                f"{kind.value} {mode.value} alpha={alpha:.4g} q={q:.3g}: condition negative at "
                f"both ends ({at_lo.value:.4g}, {at_hi.value:.4g})"
            )
            return solution

        for _ in range(self.settings.bisection_max_iter):
            if hi - lo <= beta_tol:
                break
            mid = 0.5 * (lo + hi)
            if evaluate(mid).certified:
                lo = mid
            else:
                hi = mid

        # probes outside the final bracket expose a non-monotone condition
        probes_above = [0.5 * (hi + ceiling)] if ceiling - hi > beta_tol else []
        probes_below = [0.5 * (floor + lo)] if lo - floor > beta_tol else []
        if any(evaluate(b).certified for b in probes_above) or \
                any(not evaluate(b).certified for b in probes_below):
            self.logger.warning(
                f"{kind.value} {mode.value} alpha={alpha:.4g} q={q:.3g}: condition not monotone in beta, rescanning"
            )
            solution.flags.append('non_monotone')
            lo = self._rescan(evaluate, floor, ceiling)
            hi = min(lo + self.settings.rescan_step, ceiling)

        below = evaluate(lo, sign_only=False)
        if not below.certified:
            # the sign-only pass certified lo; retry without the warm start
            self.logger.warning(
                f"{kind.value} {mode.value} alpha={alpha:.4g} q={q:.3g}: full evaluation at beta={lo:.6g} "
                f"gave {below.value:.4g}, retrying from cold seeds"
            )
            solution.flags.append('warm_start_disagreement')
            retry = evaluate(lo, sign_only=False, cold=True)
            if retry.value < below.value:
                below = retry
        above = evaluate(hi, sign_only=False)
        solution.beta = lo if below.certified else 0.0
        solution.argmin = below.argmin
        solution.residual_below = below.value
        solution.residual_above = above.value
        solution.evaluations = len(history)
        for flag in below.flags + above.flags:
            if flag not in solution.flags and flag != 'sign_only':
                solution.flags.append(flag)
        self.logger.info(
            f"{kind.value} {mode.value} alpha={alpha:.4g} q={q:.3g}: beta*={solution.beta:.6f} "
            f"({solution.evaluations} condition evaluations)"
        )
        return solution

    def solve_point(self, kind: ThresholdKind, alpha: float, q: float, modes: Tuple[Mode, ...],
                    beta_tol: float) -> CurvePoint:
        """Solve every requested mode at one (alpha, q) and check the point invariants."""
        point = CurvePoint(alpha=alpha, q=q, kind=kind)
        solutions: Dict[Mode, BetaSolution] = {}
        for mode in modes:
            seed_lo = None
            if mode is Mode.LIFTED and Mode.LIMIT in solutions and self.settings.include_limit_endpoint:
                # the lifted condition never exceeds the limit one
                seed_lo = solutions[Mode.LIMIT].beta or None
            solutions[mode] = self.solve_beta(kind, alpha, q, mode, beta_tol, beta_lo=seed_lo)
            point.flags.extend(f"{mode.value}:{flag}" for flag in solutions[mode].flags)

        if Mode.LIMIT in solutions:
            point.beta_limit = solutions[Mode.LIMIT].beta
        if Mode.LIFTED in solutions:
            point.beta_lifted = solutions[Mode.LIFTED].beta
        primary = solutions.get(Mode.LIFTED) or solutions[Mode.LIMIT]
        point.diagnostics = primary.argmin
        point.residual_below = primary.residual_below
        point.residual_above = primary.residual_above

        if kind is not ThresholdKind.WEAK:
            for beta in (point.beta_lifted, point.beta_limit):
                if beta is not None and beta > alpha / 2.0 + beta_tol:
                    point.flags.append('ceiling_exceeded')
                    break
        if point.beta_lifted is not None and point.beta_limit is not None \
                and point.beta_lifted < point.beta_limit - beta_tol:
            point.flags.append('lifted_below_limit')
        return point


def _sweep_task(args: Tuple[CurveRequest, float, float]) -> CurvePoint:
    req, q, alpha = args
    solver = ThresholdSolver(req.spec, req.settings)
    try:
        return solver.solve_point(req.kind, alpha, q, req.mode.modes(), req.beta_tol)
    except Exception as e:
        solver.logger.error(f"Point alpha={alpha} q={q} failed: {e}", exc_info=True)
        return CurvePoint(alpha=alpha, q=q, kind=req.kind, flags=[f"error:{type(e).__name__}"])


def solve_beta(kind: ThresholdKind, alpha: float, q: float, mode: Mode, spec: QuadratureSpec,
               beta_tol: float = 1e-4, settings: Optional[SearchSettings] = None) -> BetaSolution:
    """Functional entry point for ThresholdSolver.solve_beta."""
    return ThresholdSolver(spec, settings).solve_beta(kind, alpha, q, mode, beta_tol)


def sweep(req: CurveRequest, jobs: int = 1) -> List[CurvePoint]:
    """
    One CurvePoint per (q, alpha), in (q, alpha) lexicographic order.

    Points run in a process pool when jobs > 1; the ordering and the values do
    not depend on jobs.
    """
    tasks = [(req, q, alpha) for q in sorted(set(req.q_list)) for alpha in req.alpha_grid]
    logger = logging.getLogger(__name__)
    logger.info(f"Sweeping {len(tasks)} {req.kind.value} points ({req.mode.value}) with {jobs} worker(s)")
    if jobs <= 1 or len(tasks) == 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_task, tasks))


def curve_is_monotone(points: List[CurvePoint], tol: float) -> bool:
    """beta* non-decreasing in alpha within each q, for whichever modes are present."""
    by_q: Dict[float, List[CurvePoint]] = {}
    for p in points:
        by_q.setdefault(p.q, []).append(p)
    for rows in by_q.values():
        rows.sort(key=lambda p: p.alpha)
        for attr in ('beta_lifted', 'beta_limit'):
            values = [getattr(p, attr) for p in rows if getattr(p, attr) is not None]
            if any(b < a - tol for a, b in zip(values, values[1:])):
                return False
    return True
