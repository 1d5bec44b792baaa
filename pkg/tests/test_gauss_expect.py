"""Gaussian expectations against closed forms."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from src.bounds.gauss_expect import MAX_OPEN_PANELS, e_plain, fit_growth, integrate_panels, log_e_exp
from src.models.errors import InvalidParameterError, QuadratureDisagreementError
from src.models.state import QuadratureScheme, QuadratureSpec


class TestLogExpectation:

    @pytest.mark.parametrize('t', [0.1, 0.5, 1.0, 2.0])
    def test_half_normal_mgf(self, spec, t):
        closed = math.log(2.0) + 0.5 * t * t + norm.logcdf(t)
        assert log_e_exp(t, lambda h: h, True, spec).log_value == pytest.approx(closed, abs=1e-9)

    @pytest.mark.parametrize('t', [0.3, 1.5])
    def test_gaussian_mgf(self, spec, t):
        assert log_e_exp(t, lambda h: h, False, spec).log_value == pytest.approx(0.5 * t * t, abs=1e-9)

    def test_quadratic_growth_below_the_edge(self, spec):
        result = log_e_exp(0.4, lambda h: h * h, True, spec)
        assert result.finite
        assert result.log_value == pytest.approx(-0.5 * math.log(0.2), abs=1e-8)

    def test_quadratic_growth_past_the_edge_is_infeasible(self, spec):
        result = log_e_exp(0.6, lambda h: h * h, True, spec)
        assert not result.finite
        assert result.log_value == math.inf

    def test_exact_integrability_edge_is_divergent(self, spec):
        # c3 times the quadratic coefficient is exactly 1/2
        result = log_e_exp(2.0, lambda h: (np.abs(h) + 0.5) ** 2 / 4.0, True, spec)
        assert not result.finite
        assert result.log_value == math.inf

    def test_gauss_hermite_on_a_gaussian_integrand(self):
        spec = QuadratureSpec(scheme=QuadratureScheme.GAUSS_HERMITE, node_count=64)
        got = log_e_exp(0.5, lambda h: 0.25 * h * h, False, spec).log_value
        assert got == pytest.approx(-0.5 * math.log(0.75), abs=1e-10)

    def test_rejects_nonpositive_c3(self, spec):
        with pytest.raises(InvalidParameterError):
            log_e_exp(0.0, lambda h: h, True, spec)

    def test_agreement_check_passes_on_smooth_integrand(self):
        spec = QuadratureSpec(check_agreement=True)
        assert log_e_exp(1.0, lambda h: h, True, spec).finite


class TestPlainExpectation:

    def test_folded_moments(self, spec):
        assert e_plain(lambda h: h, True, spec) == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-10)
        assert e_plain(lambda h: h * h, True, spec) == pytest.approx(1.0, abs=1e-10)

    def test_signed_moments(self, spec):
        assert e_plain(lambda h: h, False, spec) == pytest.approx(0.0, abs=1e-12)
        assert e_plain(lambda h: h * h, False, spec) == pytest.approx(1.0, abs=1e-10)

    def test_kinked_integrand_under_gauss_hermite_disagrees(self):
        spec = QuadratureSpec(scheme=QuadratureScheme.GAUSS_HERMITE, node_count=32, check_agreement=True)
        with pytest.raises(QuadratureDisagreementError) as info:
            e_plain(np.abs, False, spec)
        assert info.value.tolerance == spec.agreement_tol


class TestGrowthFit:

    def test_recovers_coefficients(self, spec):
        b_quad, a1 = fit_growth(lambda h: 3.0 * h * h + 2.0 * np.abs(h) + 1.0, True, spec)
        assert b_quad == pytest.approx(3.0, abs=1e-6)
        assert a1 == pytest.approx(2.0, abs=1e-5)

    def test_fit_is_exact_on_a_shifted_quadratic(self, spec):
        b_quad, a1 = fit_growth(lambda h: (np.abs(h) + 0.5) ** 2 / 4.0, True, spec)
        assert b_quad == pytest.approx(0.25, rel=1e-12)
        assert a1 == pytest.approx(0.25, rel=1e-9)


class TestPanels:

    def test_open_panels_stay_within_budget(self):
        rng = np.random.default_rng(0)
        widths = []

        def noisy(x):
            widths.append(x.size)
            return 1.0 + 1e-6 * rng.standard_normal(x.shape)

        got = integrate_panels(noisy, 0.0, 2.0, 8)
        assert got == pytest.approx(2.0, abs=1e-4)
        assert max(widths) <= MAX_OPEN_PANELS * 16

    def test_smooth_integrand(self):
        assert integrate_panels(np.cos, 0.0, math.pi / 2.0, 4) == pytest.approx(1.0, abs=1e-13)
