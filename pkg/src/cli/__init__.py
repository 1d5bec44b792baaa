# CLI Package
from src.cli.commands import run_curve, run_empirical, run_q0, run_selftest

__all__ = ['run_curve', 'run_empirical', 'run_q0', 'run_selftest']
