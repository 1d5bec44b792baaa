"""
Recovery Simulator
Generates seeded Gaussian systems and measures empirical recovery rates of l1,
IRLS-lq and the null-space probe, with binomial confidence intervals.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from src.models.errors import NumericalFailureError, RankDeficiencyError
from src.models.state import (
    ExperimentConfig,
    RecoveryRate,
    SolverKind,
    TrialOutcome,
)
from src.simulation.solvers import nullspace_probe, solve_irls_lq, solve_l1


HEURISTIC_LABEL = 'heuristic local solver'
MAX_REGENERATIONS = 3


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, trial); independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def gen_instance(cfg: ExperimentConfig, trial: int = 0,
                 rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Draw (A, x_tilde, y) for one trial.

    A is m x n standard normal; x_tilde has k nonzeros on the last k
    coordinates with random signs and unit (or standard normal) magnitudes;
    y = A x_tilde.
    """
    rng = rng or trial_generator(cfg.seed, trial)
    m, n, k = cfg.m, cfg.n, cfg.k
    A = rng.standard_normal((m, n))
    x_tilde = np.zeros(n)
    if cfg.magnitude == 'gaussian':
        x_tilde[n - k:] = rng.standard_normal(k)
    else:
        x_tilde[n - k:] = rng.choice([-1.0, 1.0], size=k)
    return A, x_tilde, A @ x_tilde


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialOutcome:
    """One trial; solver failures become an outcome with `error` set (discarded from rates)."""
    rng = trial_generator(cfg.seed, trial)
    logger = logging.getLogger(__name__)

    for attempt in range(MAX_REGENERATIONS):
        A, x_tilde, y = gen_instance(cfg, trial, rng)
        try:
            if cfg.solver is SolverKind.NULLSPACE_PROBE:
                fraction = nullspace_probe(A, cfg.kind, cfg.q, cfg.k, cfg.probes, rng, x_tilde)
                return TrialOutcome(trial=trial, recovered=fraction == 0.0, residual=fraction,
                                    condition_violated=fraction > 0.0)
            if cfg.solver is SolverKind.L1_LP:
                x_hat = solve_l1(A, y)
            else:
                x_hat = solve_irls_lq(A, y, cfg.q, cfg.restarts, rng=rng, eps0=cfg.irls_eps0,
                                      eps_min=cfg.irls_eps_min, max_iter=cfg.irls_max_iter)
        except RankDeficiencyError as e:
            logger.warning(f"Trial {trial}: {e}; regenerating (attempt {attempt + 1})")
            continue
        except NumericalFailureError as e:
            logger.warning(f"Trial {trial} discarded: {e}")
            return TrialOutcome(trial=trial, recovered=False, residual=float('nan'), error=str(e))

        residual = float(np.linalg.norm(x_hat - x_tilde))
        recovered = residual <= cfg.recovery_tol * max(1.0, float(np.linalg.norm(x_tilde)))
        return TrialOutcome(trial=trial, recovered=recovered, residual=residual)

    return TrialOutcome(trial=trial, recovered=False, residual=float('nan'), error='rank deficiency')


def _run_trial_args(args: Tuple[ExperimentConfig, int]) -> TrialOutcome:
    return run_trial(*args)


def recovery_rate(outcomes: Sequence[TrialOutcome], cfg: ExperimentConfig, label: str = '',
                  bound_weak_limit: Optional[float] = None) -> RecoveryRate:
    """Success rate over the non-discarded trials with its 95% Wilson interval."""
    valid = [o for o in outcomes if o.error is None]
    trials = len(valid)
    successes = sum(1 for o in valid if o.recovered)
    if trials:
        ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method='wilson')
        rate, low, high = successes / trials, float(ci.low), float(ci.high)
    else:
        rate = low = high = float('nan')
    return RecoveryRate(
        alpha=cfg.alpha,
        beta=cfg.beta,
        q=cfg.q,
        n=cfg.n,
        m=cfg.m,
        k=cfg.k,
        trials=trials,
        successes=successes,
        discarded=len(outcomes) - trials,
        rate=rate,
        ci_low=low,
        ci_high=high,
        solver=cfg.solver.value,
        seed=cfg.seed,
        label=label,
        bound_weak_limit=bound_weak_limit,
    )


class RecoverySimulator:
    """
    Monte Carlo recovery experiments over seeded Gaussian systems.

    Trials run in a process pool when jobs > 1; outcomes come back in trial
    order and do not depend on the number of workers.
    """

    def __init__(self, jobs: int = 1):
        self.jobs = max(1, jobs)
        self.logger = logging.getLogger(__name__)

    def run(self, cfg: ExperimentConfig) -> List[TrialOutcome]:
        """All trials of one configuration, ordered by trial index."""
        tasks = [(cfg, t) for t in range(cfg.trials)]
        if self.jobs == 1:
            outcomes = [_run_trial_args(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                outcomes = list(pool.map(_run_trial_args, tasks, chunksize=max(1, len(tasks) // (4 * self.jobs))))
        discarded = sum(1 for o in outcomes if o.error is not None)
        if discarded:
            self.logger.warning(f"{discarded} of {cfg.trials} trials discarded at beta={cfg.beta}")
        return outcomes

    def sweep_beta(self, base_cfg: ExperimentConfig, beta_grid: Sequence[float],
                   bound_weak_limit: Optional[float] = None) -> List[RecoveryRate]:
        """
        One RecoveryRate row per beta, in grid order.

        Rows produced by the IRLS solver carry the heuristic-solver label.
        """
        label = HEURISTIC_LABEL if base_cfg.solver is SolverKind.IRLS_LQ else ''
        rows = []
        for beta in beta_grid:
            cfg = replace(base_cfg, beta=float(beta))
            row = recovery_rate(self.run(cfg), cfg, label, bound_weak_limit)
            self.logger.info(
                f"n={cfg.n} alpha={cfg.alpha:.3g} beta={cfg.beta:.4g} q={cfg.q:.3g} {cfg.solver.value}: "
                f"{row.successes}/{row.trials} recovered"
            )
            rows.append(row)
        return rows
