"""Exponent objectives and the certification condition."""

import math

import numpy as np
import pytest

from src.bounds.closed_forms import (
    folded_excess_second_moment,
    folded_plus_second_moment,
    sectional_l1_limit,
    weak_l1_limit,
)
from src.bounds.exponents import (
    _seeds,
    condition,
    i_sec,
    i_str,
    sectional_objective,
    strong_objective,
    weak_objective,
)
from src.models.errors import InvalidParameterError
from src.models.state import LiftParams, Mode, SearchSettings, ThresholdKind


class TestObjectives:

    def test_gamma_below_floor_is_infeasible(self, spec):
        assert sectional_objective(1.0, 0.1, 0.5, 0.4, 0.3, spec) == math.inf
        assert strong_objective(1.0, 0.1, 0.5, 0.4, 0.3, 0.1, spec) == math.inf

    @pytest.mark.parametrize('q', [0.3, 0.5, 1.0])
    def test_small_c3_approaches_limit(self, spec, q):
        limit = sectional_objective(0.0, 0.2, q, 1.0, 0.5, spec, Mode.LIMIT)
        lifted = sectional_objective(1e-4, 0.2, q, 1.0, 0.5, spec, Mode.LIFTED)
        assert lifted == pytest.approx(limit, abs=1e-3)

    def test_weak_at_mu_zero_drops_the_support_term(self, spec):
        weak = weak_objective(0.5, 0.3, 0.5, 1.0, 0.4, 0.0, spec)
        off_support_only = sectional_objective(0.5, 0.0, 0.5, 1.0, 0.4, spec)
        assert weak == pytest.approx(off_support_only, abs=1e-8)

    def test_limit_objective_at_q_one_is_the_quadratic_form(self, spec):
        beta, gamma, nu = 0.2, 0.8, 0.6
        got = sectional_objective(0.0, beta, 1.0, gamma, nu, spec, Mode.LIMIT)
        quad = beta * folded_plus_second_moment(nu) + (1.0 - beta) * folded_excess_second_moment(nu)
        assert got == pytest.approx(gamma + quad / (4.0 * gamma), abs=1e-9)

    def test_weak_objective_at_large_mu(self, coarse_spec):
        args = (0.0, 0.15, 1.0, 0.32578, 1.39838)
        far = weak_objective(*args, 1e3, coarse_spec, Mode.LIMIT)
        limit = weak_objective(*args, math.inf, coarse_spec, Mode.LIMIT)
        assert math.isfinite(far)
        assert far == pytest.approx(limit, abs=1e-8)

    def test_weak_lifted_objective_at_large_mu(self, coarse_spec):
        value = weak_objective(0.5, 0.15, 0.5, 0.9, 0.6, 1e3, coarse_spec, Mode.LIFTED)
        assert math.isfinite(value)


class TestCondition:

    @pytest.mark.parametrize('alpha,beta', [(0.5, 0.1), (0.3, 0.05)])
    def test_sectional_limit_matches_closed_form(self, spec, alpha, beta):
        got = condition(ThresholdKind.SECTIONAL, alpha, beta, 1.0, Mode.LIMIT, spec, SearchSettings())
        assert got.value == pytest.approx(sectional_l1_limit(alpha, beta), abs=1e-4)

    def test_weak_limit_matches_closed_form(self, coarse_spec):
        settings = SearchSettings(mu_scan_points=5)
        got = condition(ThresholdKind.WEAK, 0.5, 0.1, 1.0, Mode.LIMIT, coarse_spec, settings)
        assert got.value == pytest.approx(weak_l1_limit(0.5, 0.1), abs=1e-4)
        assert got.argmin is not None

    def test_sectional_limit_is_monotone_in_beta(self, spec):
        values = [condition(ThresholdKind.SECTIONAL, 0.5, beta, 1.0, Mode.LIMIT, spec).value
                  for beta in (0.05, 0.1, 0.15, 0.2, 0.3)]
        assert all(b >= a - 1e-5 for a, b in zip(values, values[1:]))

    @pytest.mark.slow
    @pytest.mark.parametrize('kind,betas', [
        (ThresholdKind.STRONG, (0.02, 0.05, 0.1)),
        (ThresholdKind.WEAK, (0.1, 0.2, 0.3)),
    ])
    def test_limit_is_monotone_in_beta(self, coarse_spec, kind, betas):
        settings = SearchSettings(mu_scan_points=5)
        values = [condition(kind, 0.5, beta, 1.0, Mode.LIMIT, coarse_spec, settings).value for beta in betas]
        assert all(b >= a - 1e-4 for a, b in zip(values, values[1:]))

    def test_sign_only_is_flagged(self, spec, fast_settings):
        got = condition(ThresholdKind.SECTIONAL, 0.5, 0.02, 1.0, Mode.LIMIT, spec, fast_settings,
                        sign_only=True)
        assert got.certified
        assert 'sign_only' in got.flags

    @pytest.mark.parametrize('kind,alpha,beta,q', [
        (ThresholdKind.STRONG, 0.5, 0.6, 0.5),
        (ThresholdKind.SECTIONAL, 0.5, 0.0, 0.5),
        (ThresholdKind.WEAK, 0.5, 1.0, 0.5),
        (ThresholdKind.SECTIONAL, 0.5, 0.1, 1.2),
        (ThresholdKind.SECTIONAL, 0.0, 0.1, 0.5),
    ])
    def test_rejects_out_of_domain(self, spec, kind, alpha, beta, q):
        with pytest.raises(InvalidParameterError):
            condition(kind, alpha, beta, q, Mode.LIMIT, spec)

    @pytest.mark.slow
    @pytest.mark.parametrize('q', [0.5, 1.0])
    def test_lifted_never_above_limit(self, coarse_spec, fast_settings, q):
        limit = condition(ThresholdKind.SECTIONAL, 0.5, 0.1, q, Mode.LIMIT, coarse_spec, fast_settings)
        lifted = condition(ThresholdKind.SECTIONAL, 0.5, 0.1, q, Mode.LIFTED, coarse_spec, fast_settings)
        assert lifted.value <= limit.value + 1e-9

    @pytest.mark.slow
    def test_lifted_sign_brackets(self, coarse_spec, fast_settings):
        low = condition(ThresholdKind.SECTIONAL, 0.5, 0.02, 1.0, Mode.LIFTED, coarse_spec, fast_settings)
        high = condition(ThresholdKind.SECTIONAL, 0.5, 0.24, 1.0, Mode.LIFTED, coarse_spec, fast_settings)
        assert low.certified
        assert not high.certified


class TestMinimization:

    @pytest.mark.slow
    def test_sectional_not_above_dense_grid(self, coarse_spec):
        c3, beta, q = 0.5, 0.1, 0.5
        settings = SearchSettings(restarts=3)
        optimized = i_sec(c3, beta, q, coarse_spec, Mode.LIFTED, settings).value
        gammas = 0.5 * c3 + np.linspace(0.05, 2.0, 40)
        nus = np.linspace(0.0, 2.0, 21)
        grid = min(sectional_objective(c3, beta, q, g, v, coarse_spec) for g in gammas for v in nus)
        assert optimized <= grid + 1e-4

    @pytest.mark.slow
    def test_strong_not_above_coarse_grid(self, coarse_spec):
        beta, q = 0.05, 0.5
        optimized = i_str(0.0, beta, q, coarse_spec, Mode.LIMIT, SearchSettings(restarts=3)).value
        grid = min(
            strong_objective(0.0, beta, q, g, v1, v2, coarse_spec, Mode.LIMIT)
            for g in np.linspace(0.05, 2.0, 20) for v1 in np.linspace(0.0, 2.0, 11) for v2 in np.linspace(0.0, 1.0, 6)
        )
        assert optimized <= grid + 1e-3

    def test_limit_argmin_reports_zero_c3(self, spec):
        value = i_sec(0.0, 0.1, 1.0, spec, Mode.LIMIT)
        assert value.feasible
        assert value.argmin.c3 == 0.0
        assert value.argmin.gamma > 0.0

    def test_warm_start_keeps_every_cold_seed(self):
        warm = LiftParams(c3=0.0, gamma=0.5, nu1=0.0, nu2=0.0)
        cold = _seeds(ThresholdKind.STRONG, 0.0, Mode.LIMIT, 0.5, 5, None)
        seeded = _seeds(ThresholdKind.STRONG, 0.0, Mode.LIMIT, 0.5, 5, warm)
        assert len(seeded) == len(cold) + 1
        assert all(np.array_equal(a, b) for a, b in zip(seeded[1:], cold))
        assert seeded[0].tolist() == [0.5, 0.0, 0.0]
