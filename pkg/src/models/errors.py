"""
Error Types
Exception hierarchy shared by the bound computations and the experiment harness.
"""


class LqLiftError(Exception):
    """Base class for every error raised by lqlift."""


class InvalidParameterError(LqLiftError, ValueError):
    """A parameter lies outside the domain of the operation."""


class InvalidConfigError(InvalidParameterError):
    """An experiment or YAML configuration is inconsistent."""


class QuadratureDisagreementError(LqLiftError):
    """Two quadrature resolutions disagree beyond the agreement tolerance."""

    def __init__(self, coarse: float, fine: float, tolerance: float):
        self.coarse = coarse
        self.fine = fine
        self.tolerance = tolerance
        super().__init__(
            f"Quadrature disagreement: {coarse:.12g} vs {fine:.12g} "
            f"(tolerance {tolerance:g})"
        )


class AllInfeasibleError(LqLiftError):
    """No lifting variables give finite Gaussian integrals."""


class NumericalFailureError(LqLiftError):
    """An external numerical routine failed to return a usable answer."""


class RankDeficiencyError(LqLiftError):
    """A sampled measurement matrix does not have full row rank."""
