"""Sphere exponent."""

import math

import numpy as np
import pytest

from src.bounds.sphere import i_sph, i_sph_asymptotic, i_sph_limit
from src.models.errors import InvalidParameterError


class TestSphereExponent:

    @pytest.mark.parametrize('alpha', list(np.arange(0.05, 0.96, 0.05)))
    def test_small_c3_approaches_minus_sqrt_alpha(self, alpha):
        assert i_sph(1e-4, alpha).value == pytest.approx(-math.sqrt(alpha), abs=1e-3)

    def test_limit(self):
        assert i_sph_limit(0.36) == pytest.approx(-0.6)

    @pytest.mark.parametrize('c3', [1e-3, 1.0, 1e3])
    def test_stationary_gamma_is_negative(self, c3):
        assert i_sph(c3, 0.5).gamma_hat < 0.0

    def test_large_c3_matches_asymptotic_form(self):
        assert i_sph(1e3, 0.5).value == pytest.approx(i_sph_asymptotic(1e3, 0.5), rel=1e-5)

    def test_huge_c3_stays_finite(self):
        value = i_sph(1e12, 0.5).value
        assert math.isfinite(value)
        assert value == pytest.approx(i_sph_asymptotic(1e12, 0.5), rel=1e-9)

    @pytest.mark.parametrize('c3,alpha', [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0), (1.0, 1.5)])
    def test_rejects_out_of_domain(self, c3, alpha):
        with pytest.raises(InvalidParameterError):
            i_sph(c3, alpha)
