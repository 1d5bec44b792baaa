"""
CLI Commands
Orchestrates curve sweeps, q -> 0 closed forms and Monte Carlo runs, and
writes their CSV / JSON outputs together with the run manifest.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src import __version__
from src.bounds.closed_forms import weak_l1_threshold
from src.bounds.q0_closed import q0_threshold
from src.bounds.threshold import ThresholdSolver, curve_is_monotone, sweep
from src.cli.selftest import print_table, run_checks
from src.models.errors import InvalidConfigError, LqLiftError
from src.models.state import (
    CURVE_COLUMNS,
    Command,
    CurveRequest,
    ExperimentConfig,
    Mode,
    QuadratureSpec,
    RecoveryRate,
    SearchSettings,
    SolverKind,
    SweepMode,
    ThresholdKind,
    round_half_up,
)
from src.reporting.run_log import RunRecorder
from src.reporting.writers import write_table
from src.simulation.recovery_simulator import RecoverySimulator
from src.utils.config_loader import (
    config_hash,
    get_config_value,
    load_bounds_config,
    load_simulation_config,
    quadrature_spec_from_config,
    resolve_seed,
    search_settings_from_config,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3

DEFAULT_Q_LIST = (0.0, 0.1, 0.3, 0.5, 1.0)
DEFAULT_ALPHA_GRID = '0.1:0.9:0.1'

Q0_COLUMNS = ['alpha', 'kind', 'c3_max', 'beta', 'margin', 'c3_star', 'b_star', 'slack_star', 'nu_g_star']
EMPIRICAL_COLUMNS = [f.name for f in fields(RecoveryRate)]

# coarser searches for --fast
FAST_SETTINGS = dict(restarts=2, max_evals=200, c3_scan_points=11, mu_scan_points=5)
FAST_NODES = 128
FAST_TRIALS = 50


def parse_grid(text: str) -> Tuple[float, ...]:
    """
    `start:stop:step` (inclusive of stop within rounding) or a comma list.

    Values are rounded to 12 decimals so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
    """
    text = text.strip()
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3:
            raise ValueError(f"grid '{text}' must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0 or stop < start:
            raise ValueError(f"grid '{text}' needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    values = tuple(float(v) for v in text.split(',') if v.strip())
    if not values:
        raise ValueError("empty list")
    return values


def parse_range(text: str) -> Tuple[float, float]:
    """`lo:hi` with 0 < lo < hi."""
    parts = text.split(':')
    if len(parts) != 2:
        raise ValueError(f"range '{text}' must be lo:hi")
    lo, hi = float(parts[0]), float(parts[1])
    if not 0.0 < lo < hi:
        raise ValueError(f"range '{text}' needs 0 < lo < hi")
    return lo, hi


@dataclass
class RunContext:
    """Everything a command needs besides its own flags."""
    out_dir: Path
    jobs: int
    bounds_config: Dict[str, Any] = field(default_factory=dict)
    simulation_config: Dict[str, Any] = field(default_factory=dict)
    fast: bool = False

    @classmethod
    def from_args(cls, args) -> 'RunContext':
        config_dir = Path(args.config) if getattr(args, 'config', None) else None
        return cls(
            out_dir=Path(args.out),
            jobs=args.jobs or os.cpu_count() or 1,
            bounds_config=load_bounds_config(config_dir),
            simulation_config=load_simulation_config(config_dir),
            fast=getattr(args, 'fast', False),
        )

    @property
    def config_hash(self) -> str:
        return config_hash(self.bounds_config, self.simulation_config)

    def spec(self, node_count: Optional[int] = None) -> QuadratureSpec:
        if node_count is None and self.fast:
            node_count = FAST_NODES
        return quadrature_spec_from_config(self.bounds_config, node_count=node_count)

    def settings(self, c3_range: Optional[Tuple[float, float]] = None) -> SearchSettings:
        overrides: Dict[str, Any] = dict(FAST_SETTINGS) if self.fast else {}
        if c3_range is not None:
            overrides.update(c3_min=c3_range[0], c3_max=c3_range[1])
        return search_settings_from_config(self.bounds_config, **overrides)

    def recorder(self, command: Command, request: Dict[str, Any]) -> RunRecorder:
        recorder = RunRecorder(command, request, __version__, self.config_hash)
        recorder.start()
        return recorder

    def finish(self, recorder: RunRecorder):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        recorder.export_to_json(self.out_dir / 'run_manifest.json')


def _kinds(kind: str, allowed: Tuple[ThresholdKind, ...]) -> List[ThresholdKind]:
    if kind == 'all':
        return list(allowed)
    return [ThresholdKind(kind)]


def run_curve(args, ctx: RunContext) -> int:
    """
    Sweep beta*(alpha) for each requested kind and write
    `curve_<kind>_<mode>.csv` plus its JSON twin.
    """
    spec = ctx.spec(args.quad_nodes)
    settings = ctx.settings(args.c3_range)
    seed = resolve_seed(args.seed, get_config_value(ctx.simulation_config, 'simulation.seed', 0))
    beta_tol = args.beta_tol if args.beta_tol is not None else \
        float(get_config_value(ctx.bounds_config, 'bisection.beta_tol', 1e-4))
    mode = SweepMode(args.mode)

    requests = [
        CurveRequest(kind=kind, q_list=tuple(args.q), alpha_grid=tuple(args.alpha), mode=mode,
                     beta_tol=beta_tol, spec=spec, seed=seed, settings=settings)
        for kind in _kinds(args.kind, tuple(ThresholdKind))
    ]
    recorder = ctx.recorder(Command.CURVE, {'requests': [r.to_dict() for r in requests]})

    status = EXIT_OK
    try:
        for req in requests:
            points = sweep(req, jobs=ctx.jobs)
            for point in points:
                recorder.log_point(point)
            if not curve_is_monotone(points, req.beta_tol):
                logger.warning(f"{req.kind.value}: beta* is not monotone in alpha on this grid")
            header = dict(recorder.manifest.header(), request=req.to_dict())
            write_table(ctx.out_dir, f"curve_{req.kind.value}_{req.mode.value}",
                        [p.to_row() for p in points], CURVE_COLUMNS, header)
            if points and all(any(f.startswith('error:') for f in p.flags) for p in points):
                recorder.log_error(f"every {req.kind.value} point failed")
                status = EXIT_FAILURE
    except LqLiftError as e:
        logger.error(f"Curve sweep failed: {e}", exc_info=True)
        recorder.log_error(str(e))
        status = EXIT_FAILURE
    finally:
        ctx.finish(recorder)
    return status


def run_q0(args, ctx: RunContext) -> int:
    """beta*(alpha) of the q -> 0 closed forms, one `q0_<kind>.csv` per kind."""
    c3_max = args.c3_max if args.c3_max is not None else \
        float(get_config_value(ctx.bounds_config, 'q0.c3_max', 1e4))
    kinds = _kinds(args.kind, (ThresholdKind.SECTIONAL, ThresholdKind.STRONG))
    request = {'kinds': [k.value for k in kinds], 'alpha_grid': list(args.alpha), 'c3_max': c3_max}
    recorder = ctx.recorder(Command.Q0, request)

    status = EXIT_OK
    try:
        for kind in kinds:
            rows = []
            for alpha in args.alpha:
                row = q0_threshold(alpha, kind, c3_max)
                recorder.log_q0(row)
                rows.append(row.to_dict())
            write_table(ctx.out_dir, f"q0_{kind.value}", rows, Q0_COLUMNS, recorder.manifest.header())
    except LqLiftError as e:
        logger.error(f"q0 run failed: {e}", exc_info=True)
        recorder.log_error(str(e))
        status = EXIT_FAILURE
    finally:
        ctx.finish(recorder)
    return status


def _weak_limit_bound(alpha: float, q: float, spec: QuadratureSpec,
                      settings: SearchSettings, beta_tol: float) -> float:
    if q == 1.0:
        return weak_l1_threshold(alpha)
    solution = ThresholdSolver(spec, settings).solve_beta(ThresholdKind.WEAK, alpha, q, Mode.LIMIT, beta_tol)
    return solution.beta


def default_beta_grid(n: int, alpha: float, center: float, points: int) -> Tuple[float, ...]:
    """points betas from 0.5 to 1.5 times center, clipped so that 1 <= k < m."""
    m = round_half_up(alpha * n)
    lo, hi = 1.0 / n, (m - 1) / n
    if not center > 0.0:
        center = 0.5 * alpha
    grid = np.clip(np.linspace(0.5 * center, 1.5 * center, points), lo, hi)
    return tuple(float(round(b, 12)) for b in grid)


def run_empirical(args, ctx: RunContext) -> int:
    """Recovery rates over a beta grid for each alpha, with the computed weak bound overlaid."""
    sim = ctx.simulation_config
    seed = resolve_seed(args.seed, get_config_value(sim, 'simulation.seed', 0))
    n = args.n or int(get_config_value(sim, 'simulation.n', 200))
    trials = args.trials or int(get_config_value(sim, 'simulation.trials', 200))
    if ctx.fast:
        trials = min(trials, FAST_TRIALS)
    solver = SolverKind(args.solver)
    q = args.q[0]
    if solver is SolverKind.L1_LP and q != 1.0:
        raise InvalidConfigError("the l1_lp solver measures q = 1; use irls_lq for q < 1")
    beta_tol = float(get_config_value(ctx.bounds_config, 'bisection.beta_tol', 1e-4))
    spec, settings = ctx.spec(args.quad_nodes), ctx.settings(args.c3_range)

    base = dict(
        n=n,
        q=q,
        trials=trials,
        seed=seed,
        solver=solver,
        kind=ThresholdKind(args.kind),
        restarts=int(get_config_value(sim, 'irls.restarts', 1)),
        probes=int(get_config_value(sim, 'nullspace_probe.probes', 100)),
        magnitude=str(get_config_value(sim, 'simulation.magnitude', 'unit')),
        recovery_tol=float(get_config_value(sim, 'simulation.recovery_tol', 1e-6)),
        irls_eps0=float(get_config_value(sim, 'irls.eps0', 1.0)),
        irls_eps_min=float(get_config_value(sim, 'irls.eps_min', 1e-12)),
        irls_max_iter=int(get_config_value(sim, 'irls.max_iter', 500)),
    )
    points = int(get_config_value(sim, 'simulation.beta_points', 11))
    request = dict(base, solver=solver.value, kind=base['kind'].value, alpha_grid=list(args.alpha),
                   beta_grid=list(args.beta_grid) if args.beta_grid else None)
    recorder = ctx.recorder(Command.EMPIRICAL, request)
    simulator = RecoverySimulator(jobs=ctx.jobs)

    status = EXIT_OK
    rows: List[Dict[str, Any]] = []
    try:
        for alpha in args.alpha:
            bound = _weak_limit_bound(alpha, q, spec, settings, beta_tol)
            grid = tuple(args.beta_grid) if args.beta_grid else default_beta_grid(n, alpha, bound, points)
            base_cfg = ExperimentConfig(alpha=alpha, beta=grid[0], **base)
            for row in simulator.sweep_beta(base_cfg, grid, bound_weak_limit=bound):
                recorder.log_rate(row)
                rows.append(row.to_dict())
        write_table(ctx.out_dir, f"empirical_{solver.value}", rows, EMPIRICAL_COLUMNS,
                    recorder.manifest.header())
    except InvalidConfigError:
        raise
    except LqLiftError as e:
        logger.error(f"Empirical run failed: {e}", exc_info=True)
        recorder.log_error(str(e))
        status = EXIT_FAILURE
    finally:
        ctx.finish(recorder)
    return status


def run_selftest(args, ctx: Optional[RunContext] = None) -> int:
    """Oracle cross-checks; prints the pass/fail table, exit 0 iff all pass."""
    results = run_checks(fast=args.fast)
    print_table(results)
    if ctx is not None:
        recorder = ctx.recorder(Command.SELFTEST, {'fast': args.fast})
        for r in results:
            if not r.passed:
                recorder.log_error(f"check {r.name} failed", asdict(r))
        ctx.finish(recorder)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE
