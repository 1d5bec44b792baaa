"""In-repo error functions against scipy and the series references."""

import numpy as np
import pytest
import scipy.special as sc

from src.bounds.special import (
    ERFCX_COEFFICIENTS,
    erf,
    erf_series,
    erfc,
    erfc_continued_fraction,
    log_erfc,
)


class TestErf:

    def test_erf_matches_scipy(self):
        x = np.linspace(-6.0, 6.0, 1201)
        assert np.max(np.abs(erf(x) - sc.erf(x))) < 1e-12

    def test_erfc_relative_error(self):
        x = np.linspace(-5.0, 25.0, 1501)
        assert np.max(np.abs(erfc(x) / sc.erfc(x) - 1.0)) < 1e-10

    def test_erf_is_odd(self):
        x = np.linspace(0.0, 5.0, 101)
        assert np.array_equal(erf(-x), -erf(x))

    @pytest.mark.parametrize('x', [30.0, 100.0, 1e3])
    def test_log_erfc_far_tail(self, x):
        expected = -x * x + np.log(sc.erfcx(x))
        assert float(log_erfc(x)) == pytest.approx(expected, rel=1e-10)

    def test_corrupted_table_is_detected(self):
        corrupted = ERFCX_COEFFICIENTS.copy()
        corrupted[-1] *= 1.01
        x = np.linspace(0.1, 3.0, 30)
        assert np.max(np.abs(erf(x, corrupted) - sc.erf(x))) > 1e-6


class TestReferences:

    @pytest.mark.parametrize('x', [0.1, 0.5, 1.0, 2.0])
    def test_series(self, x):
        assert erf_series(x) == pytest.approx(float(sc.erf(x)), abs=1e-13)

    @pytest.mark.parametrize('x', [4.0, 6.0, 10.0])
    def test_continued_fraction(self, x):
        assert erfc_continued_fraction(x) == pytest.approx(float(sc.erfc(x)), rel=1e-12)
