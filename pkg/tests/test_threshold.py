"""Bisection on beta and curve sweeps."""

import pytest

import src.bounds.threshold as threshold
from src.bounds.closed_forms import sectional_l1_threshold, weak_l1_threshold
from src.bounds.threshold import ThresholdSolver, beta_ceiling, curve_is_monotone, sweep
from src.models.errors import AllInfeasibleError
from src.models.state import (
    ConditionValue,
    CurvePoint,
    CurveRequest,
    LiftParams,
    Mode,
    QuadratureSpec,
    SearchSettings,
    SweepMode,
    ThresholdKind,
)
from tests.helpers import linear_condition


@pytest.fixture
def solver():
    return ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings())


class TestBisection:

    def test_finds_the_root(self, monkeypatch, solver):
        monkeypatch.setattr(threshold, 'condition', linear_condition(0.123))
        result = solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIFTED, 1e-4)
        assert result.beta == pytest.approx(0.123, abs=1e-4)
        assert result.beta <= 0.123
        assert result.residual_below < 0.0 <= result.residual_above
        assert result.flags == []

    def test_weak_bracket_reaches_alpha(self, monkeypatch, solver):
        monkeypatch.setattr(threshold, 'condition', linear_condition(0.4))
        result = solver.solve_beta(ThresholdKind.WEAK, 0.5, 1.0, Mode.LIMIT, 1e-4)
        assert result.beta == pytest.approx(0.4, abs=1e-4)

    def test_ceilings(self):
        assert beta_ceiling(ThresholdKind.STRONG, 0.6) == pytest.approx(0.3)
        assert beta_ceiling(ThresholdKind.WEAK, 0.6) == pytest.approx(0.6)
        assert beta_ceiling(ThresholdKind.WEAK, 1.0) < 1.0

    def test_uncertified_at_lower(self, monkeypatch, solver):
        monkeypatch.setattr(threshold, 'condition', linear_condition(-0.5))
        result = solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIFTED)
        assert result.beta == 0.0
        assert 'uncertified_at_lower' in result.flags

    def test_bracket_failure(self, monkeypatch, solver):
        monkeypatch.setattr(threshold, 'condition', linear_condition(5.0))
        result = solver.solve_beta(ThresholdKind.STRONG, 0.4, 0.5, Mode.LIFTED)
        assert result.beta == pytest.approx(0.2)
        assert 'bracket_failure' in result.flags

    def test_non_monotone_condition_triggers_rescan(self, monkeypatch, solver):
        def fake(kind, alpha, beta, q, mode, spec, settings=None, warm_start=None, sign_only=False):
            certified = beta < 0.1 or 0.17 < beta < 0.18
            return ConditionValue(value=-1.0 if certified else 1.0, argmin=None, mode=mode)

        monkeypatch.setattr(threshold, 'condition', fake)
        result = solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIFTED, 1e-4)
        assert 'non_monotone' in result.flags
        assert 0.098 < result.beta < 0.1

    def test_warm_start_is_passed_along(self, monkeypatch, solver):
        calls = []
        monkeypatch.setattr(threshold, 'condition', linear_condition(0.2, calls))
        solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIFTED, 1e-3)
        assert calls[0]['warm_start'] is None
        assert all(c['warm_start'] is not None for c in calls[1:])
        assert any(c['sign_only'] for c in calls)
        assert not calls[-1]['sign_only']

    def test_supplied_lower_end_is_used(self, monkeypatch, solver):
        calls = []
        monkeypatch.setattr(threshold, 'condition', linear_condition(0.2, calls))
        solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIFTED, 1e-3, beta_lo=0.15)
        assert calls[0]['beta'] == pytest.approx(0.15)

    def test_contradicted_lower_end_is_retried_cold(self, monkeypatch, solver):
        calls = []

        def fake(kind, alpha, beta, q, mode, spec, settings=None, warm_start=None, sign_only=False):
            calls.append(dict(beta=beta, warm_start=warm_start, sign_only=sign_only))
            stuck = warm_start is not None and not sign_only
            return ConditionValue(value=0.29 if stuck else beta - 0.05,
                                  argmin=LiftParams(c3=0.0, gamma=0.5), mode=mode)

        monkeypatch.setattr(threshold, 'condition', fake)
        result = solver.solve_beta(ThresholdKind.STRONG, 0.5, 1.0, Mode.LIMIT, 1e-4)
        assert result.beta == pytest.approx(0.05, abs=1e-4)
        assert result.residual_below < 0.0
        assert 'warm_start_disagreement' in result.flags
        assert any(c['warm_start'] is None and not c['sign_only'] for c in calls)

    def test_failed_retry_returns_zero_with_a_flag(self, monkeypatch, solver):
        def fake(kind, alpha, beta, q, mode, spec, settings=None, warm_start=None, sign_only=False):
            return ConditionValue(value=beta - 0.05 if sign_only else 0.29, argmin=None, mode=mode)

        monkeypatch.setattr(threshold, 'condition', fake)
        result = solver.solve_beta(ThresholdKind.STRONG, 0.5, 1.0, Mode.LIMIT, 1e-4)
        assert result.beta == 0.0
        assert 'warm_start_disagreement' in result.flags

    def test_empty_bracket(self, solver):
        result = solver.solve_beta(ThresholdKind.SECTIONAL, 1e-4, 0.5, Mode.LIFTED)
        assert result.beta == 0.0
        assert 'empty_bracket' in result.flags


class TestSolvePoint:

    def test_both_modes(self, monkeypatch, solver):
        roots = {Mode.LIMIT: 0.1, Mode.LIFTED: 0.15}
        monkeypatch.setattr(threshold, 'condition', linear_condition(lambda kind, alpha, mode: roots[mode]))
        point = solver.solve_point(ThresholdKind.SECTIONAL, 0.5, 0.5, (Mode.LIMIT, Mode.LIFTED), 1e-4)
        assert point.beta_limit == pytest.approx(0.1, abs=1e-4)
        assert point.beta_lifted == pytest.approx(0.15, abs=1e-4)
        assert 'lifted_below_limit' not in point.flags

    def test_lifted_below_limit_is_flagged(self, monkeypatch, solver):
        roots = {Mode.LIMIT: 0.15, Mode.LIFTED: 0.1}
        monkeypatch.setattr(threshold, 'condition', linear_condition(lambda kind, alpha, mode: roots[mode]))
        point = solver.solve_point(ThresholdKind.SECTIONAL, 0.5, 0.5, (Mode.LIMIT, Mode.LIFTED), 1e-4)
        assert point.beta_lifted == pytest.approx(0.1, abs=1e-4)
        assert 'lifted_below_limit' in point.flags

    def test_limit_only_leaves_lifted_empty(self, monkeypatch, solver):
        monkeypatch.setattr(threshold, 'condition', linear_condition(0.1))
        point = solver.solve_point(ThresholdKind.SECTIONAL, 0.5, 0.5, (Mode.LIMIT,), 1e-4)
        assert point.beta_lifted is None
        assert point.to_row()['beta_lifted'] is None


class TestSweep:

    def _request(self, **kwargs):
        defaults = dict(kind=ThresholdKind.SECTIONAL, q_list=(1.0, 0.5), alpha_grid=(0.3, 0.5),
                        mode=SweepMode.LIMIT, spec=QuadratureSpec(node_count=128))
        defaults.update(kwargs)
        return CurveRequest(**defaults)

    def test_order_and_cardinality(self, monkeypatch):
        monkeypatch.setattr(threshold, 'condition', linear_condition(lambda kind, alpha, mode: alpha / 4.0))
        points = sweep(self._request())
        assert [(p.q, p.alpha) for p in points] == [(0.5, 0.3), (0.5, 0.5), (1.0, 0.3), (1.0, 0.5)]
        assert curve_is_monotone(points, 1e-4)

    def test_failed_point_is_flagged_not_fatal(self, monkeypatch):
        def root(kind, alpha, mode):
            if alpha == 0.3:
                raise AllInfeasibleError("no finite exponent")
            return 0.1

        monkeypatch.setattr(threshold, 'condition', linear_condition(root))
        points = sweep(self._request())
        failed = [p for p in points if p.alpha == 0.3]
        assert all(p.flags == ['error:AllInfeasibleError'] for p in failed)
        assert all(p.beta_limit == pytest.approx(0.1, abs=1e-4) for p in points if p.alpha == 0.5)

    def test_monotonicity_check(self):
        points = [CurvePoint(alpha=0.3, q=1.0, kind=ThresholdKind.WEAK, beta_limit=0.1),
                  CurvePoint(alpha=0.5, q=1.0, kind=ThresholdKind.WEAK, beta_limit=0.05)]
        assert not curve_is_monotone(points, 1e-4)


@pytest.mark.slow
class TestAgainstClosedForms:

    def test_sectional_l1_limit_threshold(self):
        solver = ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings(restarts=3))
        got = solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 1.0, Mode.LIMIT, 1e-4).beta
        assert got == pytest.approx(sectional_l1_threshold(0.5), abs=2e-3)

    def test_weak_l1_limit_threshold(self):
        solver = ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings(restarts=3, mu_scan_points=5))
        got = solver.solve_beta(ThresholdKind.WEAK, 0.5, 1.0, Mode.LIMIT, 1e-4).beta
        assert got == pytest.approx(weak_l1_threshold(0.5), abs=2e-3)

    def test_lifted_not_below_limit(self):
        settings = SearchSettings(restarts=2, max_evals=200, c3_scan_points=9)
        point = ThresholdSolver(QuadratureSpec(node_count=128), settings).solve_point(
            ThresholdKind.SECTIONAL, 0.5, 0.5, (Mode.LIMIT, Mode.LIFTED), 1e-3)
        assert point.beta_lifted >= point.beta_limit - 1e-3
        assert point.beta_lifted <= 0.25


@pytest.fixture(scope='module')
def limit_thresholds():
    solver = ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings(mu_scan_points=5))
    return {kind: solver.solve_beta(kind, 0.5, 1.0, Mode.LIMIT, 1e-3) for kind in ThresholdKind}


@pytest.mark.slow
class TestThresholdProperties:

    def test_kind_ordering(self, limit_thresholds):
        weak = limit_thresholds[ThresholdKind.WEAK].beta
        sectional = limit_thresholds[ThresholdKind.SECTIONAL].beta
        strong = limit_thresholds[ThresholdKind.STRONG].beta
        assert weak >= sectional - 1e-3
        assert sectional >= strong - 1e-3

    def test_strong_threshold_is_certified(self, limit_thresholds):
        result = limit_thresholds[ThresholdKind.STRONG]
        assert 0.025 < result.beta < 0.045
        assert result.residual_below < 0.0

    def test_strong_with_few_restarts(self):
        solver = ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings(restarts=3))
        result = solver.solve_beta(ThresholdKind.STRONG, 0.5, 1.0, Mode.LIMIT, 1e-3)
        assert result.beta > 0.025

    def test_smaller_q_certifies_more(self, limit_thresholds):
        solver = ThresholdSolver(QuadratureSpec(node_count=128), SearchSettings())
        half = solver.solve_beta(ThresholdKind.SECTIONAL, 0.5, 0.5, Mode.LIMIT, 1e-3).beta
        assert half >= limit_thresholds[ThresholdKind.SECTIONAL].beta - 1e-3

    @pytest.mark.parametrize('kind', [ThresholdKind.STRONG, ThresholdKind.WEAK])
    def test_lifted_not_below_limit(self, kind):
        settings = SearchSettings(restarts=2, max_evals=200, c3_scan_points=7, mu_scan_points=3)
        point = ThresholdSolver(QuadratureSpec(node_count=128), settings).solve_point(
            kind, 0.5, 1.0, (Mode.LIMIT, Mode.LIFTED), 1e-2)
        assert point.beta_limit > 0.0
        assert point.beta_lifted >= point.beta_limit - 1e-2
        assert 'lifted_below_limit' not in point.flags
