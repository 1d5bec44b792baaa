# Bounds Package
from src.bounds.exponents import condition, exponent, i_sec, i_str, i_weak
from src.bounds.q0_closed import q0_sectional_condition, q0_strong_condition, q0_threshold
from src.bounds.sphere import i_sph, i_sph_limit
from src.bounds.threshold import ThresholdSolver, solve_beta, sweep

__all__ = [
    'condition',
    'exponent',
    'i_sec',
    'i_str',
    'i_weak',
    'q0_sectional_condition',
    'q0_strong_condition',
    'q0_threshold',
    'i_sph',
    'i_sph_limit',
    'ThresholdSolver',
    'solve_beta',
    'sweep'
]
