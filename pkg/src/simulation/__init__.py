# Simulation Package
from src.simulation.recovery_simulator import RecoverySimulator, gen_instance, recovery_rate
from src.simulation.solvers import nullspace_probe, solve_irls_lq, solve_l1

__all__ = ['RecoverySimulator', 'gen_instance', 'recovery_rate', 'nullspace_probe', 'solve_irls_lq', 'solve_l1']
