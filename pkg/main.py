"""
Main Entry Point
Command-line front end for the lifted lq threshold bounds and their Monte Carlo checks.
"""

import argparse
import logging
import sys
from typing import List, Optional

from src.cli.commands import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_Q_LIST,
    EXIT_FAILURE,
    EXIT_USAGE,
    RunContext,
    parse_grid,
    parse_range,
    run_curve,
    run_empirical,
    run_q0,
    run_selftest,
)
from src.models.errors import InvalidConfigError, InvalidParameterError, LqLiftError
from src.utils.config_loader import load_bounds_config, setup_logging


def _grid(text: str):
    try:
        return parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _range(text: str):
    try:
        return parse_range(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default='out', help='Output directory')
    common.add_argument('--config', default=None, help='Directory holding the YAML configuration')
    common.add_argument('--jobs', type=int, default=None, help='Worker processes (default: logical cores)')
    common.add_argument('--seed', type=int, default=None, help='Seed (LQLIFT_SEED overrides it)')
    common.add_argument('--log-level', default=None, help='Logging level (default from config)')
    common.add_argument('--fast', action='store_true', help='Coarser searches / fewer trials / fewer checks')

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument('--quad-nodes', type=int, default=None, help='Quadrature nodes (default 256)')
    numeric.add_argument('--c3-range', type=_range, default=None, help='c3 search range lo:hi')
    numeric.add_argument('--beta-tol', type=float, default=None, help='Bisection tolerance (default 1e-4)')

    parser = argparse.ArgumentParser(
        description='Lifted lower bounds on lq recovery thresholds of Gaussian linear systems'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    curve = sub.add_parser('curve', parents=[common, numeric], help='Sweep beta*(alpha)')
    curve.add_argument('--kind', choices=['sectional', 'strong', 'weak', 'all'], required=True)
    curve.add_argument('--q', type=_grid, default=DEFAULT_Q_LIST, help='q values, list or grid')
    curve.add_argument('--alpha', type=_grid, default=parse_grid(DEFAULT_ALPHA_GRID),
                       help='alpha grid, start:stop:step or list')
    curve.add_argument('--mode', choices=['lifted', 'limit', 'both'], default='both')

    q0 = sub.add_parser('q0', parents=[common], help='q -> 0 closed-form thresholds')
    q0.add_argument('--kind', choices=['sectional', 'strong', 'all'], default='all')
    q0.add_argument('--alpha', type=_grid, default=parse_grid(DEFAULT_ALPHA_GRID))
    q0.add_argument('--c3-max', type=float, default=None, help='Largest c3 searched (default 1e4)')

    empirical = sub.add_parser('empirical', parents=[common, numeric], help='Monte Carlo recovery rates')
    empirical.add_argument('--n', type=int, default=None, help='Signal length (default 200)')
    empirical.add_argument('--alpha', type=_grid, default=(0.5,))
    empirical.add_argument('--q', type=_grid, default=(1.0,), help='Single q value')
    empirical.add_argument('--beta-grid', type=_grid, default=None,
                           help='beta values (default: 11 points around the computed weak bound)')
    empirical.add_argument('--trials', type=int, default=None, help='Trials per beta (default 200)')
    empirical.add_argument('--solver', choices=['l1_lp', 'irls_lq', 'nullspace_probe'], default='l1_lp')
    empirical.add_argument('--kind', choices=['sectional', 'strong', 'weak'], default='weak',
                           help='Condition checked by the null-space probe')

    sub.add_parser('selftest', parents=[common], help='Run the oracle cross-checks')
    return parser


COMMANDS = {
    'curve': run_curve,
    'q0': run_q0,
    'empirical': run_empirical,
    'selftest': run_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        setup_logging(load_bounds_config(args.config), args.log_level)
        if args.command == 'empirical' and len(args.q) != 1:
            raise InvalidParameterError("empirical takes a single --q value")
        ctx = RunContext.from_args(args)
        return COMMANDS[args.command](args, ctx)
    except (InvalidParameterError, InvalidConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LqLiftError as e:
        logging.getLogger(__name__).error(f"Run failed: {e}", exc_info=True)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
