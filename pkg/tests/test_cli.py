"""Command-line surface."""

import json

import numpy as np
import pytest

import src.bounds.threshold as threshold
from main import main
from src.cli.commands import EXIT_OK, EXIT_USAGE, default_beta_grid, parse_grid, parse_range
from src.cli.selftest import check_erf, run_checks
from src.bounds.special import ERFCX_COEFFICIENTS
from src.reporting.writers import read_csv, read_manifest_header
from src.utils.config_loader import SEED_ENV_VAR
from tests.helpers import linear_condition


@pytest.fixture
def quarter_alpha(monkeypatch):
    monkeypatch.setattr(threshold, 'condition', linear_condition(lambda kind, alpha, mode: alpha / 4.0))


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)


def _curve(out, *extra):
    return main(['curve', '--kind', 'sectional', '--q', '0.5,1', '--alpha', '0.1:0.9:0.1',
                 '--jobs', '1', '--log-level', 'WARNING', '--out', str(out), *extra])


class TestGrids:

    def test_range_grid(self):
        grid = parse_grid('0.1:0.9:0.1')
        assert len(grid) == 9
        assert grid[2] == 0.3
        assert grid[-1] == 0.9

    def test_list_grid(self):
        assert parse_grid('0, 0.5,1') == (0.0, 0.5, 1.0)

    @pytest.mark.parametrize('text', ['1:0:0.1', 'a:b', '0.1:0.5:0', ''])
    def test_bad_grid(self, text):
        with pytest.raises(ValueError):
            parse_grid(text)

    def test_range(self):
        assert parse_range('1e-3:1e3') == (1e-3, 1e3)
        with pytest.raises(ValueError):
            parse_range('5:1')

    def test_default_beta_grid(self):
        grid = default_beta_grid(200, 0.5, 0.19, 11)
        assert len(grid) == 11
        assert grid[0] == pytest.approx(0.095)
        assert grid[-1] == pytest.approx(0.285)
        assert all(1 / 200 <= b <= 99 / 200 for b in grid)


class TestCurve:

    def test_limit_mode_leaves_lifted_empty(self, tmp_path, quarter_alpha):
        assert _curve(tmp_path, '--mode', 'limit') == EXIT_OK
        frame = read_csv(tmp_path / 'curve_sectional_limit.csv')
        assert len(frame) == 18
        assert frame['beta_lifted'].isna().all()
        assert np.allclose(frame['beta_limit'], frame['alpha'] / 4.0, atol=1e-4)
        assert list(frame['q']) == [0.5] * 9 + [1.0] * 9

    def test_outputs_are_byte_identical_across_runs(self, tmp_path, quarter_alpha):
        _curve(tmp_path / 'a')
        _curve(tmp_path / 'b')
        for name in ('curve_sectional_both.csv', 'curve_sectional_both.json'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_manifest_files(self, tmp_path, quarter_alpha):
        _curve(tmp_path, '--mode', 'lifted')
        header = read_manifest_header(tmp_path / 'curve_sectional_lifted.csv')
        assert header['command'] == 'curve'
        assert header['request']['mode'] == 'lifted'
        run = json.loads((tmp_path / 'run_manifest.json').read_text(encoding='utf-8'))
        assert run['wall_clock_seconds'] >= 0.0
        assert len(run['point_status']) == 18

    def test_unknown_kind_is_a_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(['curve', '--kind', 'bogus', '--out', str(tmp_path)])
        assert info.value.code == EXIT_USAGE

    def test_decreasing_alpha_grid_is_a_usage_error(self, tmp_path):
        assert main(['curve', '--kind', 'weak', '--alpha', '0.5,0.3', '--out', str(tmp_path)]) == EXIT_USAGE


class TestQ0:

    def test_rows(self, tmp_path):
        assert main(['q0', '--kind', 'sectional', '--alpha', '0.2,0.5', '--out', str(tmp_path)]) == EXIT_OK
        frame = read_csv(tmp_path / 'q0_sectional.csv')
        assert list(frame['alpha']) == [0.2, 0.5]
        assert (frame['beta'] <= frame['alpha'] / 2.0).all()
        assert (frame['beta'] > 0.0).all()


class TestEmpirical:

    def _run(self, out, *extra):
        return main(['empirical', '--n', '30', '--alpha', '0.5', '--beta-grid', '0.1,0.15', '--trials', '3',
                     '--jobs', '1', '--out', str(out), *extra])

    def test_rows_and_bound(self, tmp_path):
        assert self._run(tmp_path) == EXIT_OK
        frame = read_csv(tmp_path / 'empirical_l1_lp.csv')
        assert list(frame['beta']) == [0.1, 0.15]
        assert (frame['trials'] + frame['discarded'] == 3).all()
        assert frame['bound_weak_limit'].iloc[0] == pytest.approx(0.1924, abs=5e-3)

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, '7')
        self._run(tmp_path, '--seed', '2')
        assert (read_csv(tmp_path / 'empirical_l1_lp.csv')['seed'] == 7).all()

    def test_l1_solver_needs_q_one(self, tmp_path):
        assert self._run(tmp_path, '--q', '0.5') == EXIT_USAGE

    def test_single_q(self, tmp_path):
        assert self._run(tmp_path, '--solver', 'irls_lq', '--q', '0.5,0.7') == EXIT_USAGE


class TestSelftest:

    def test_erf_check_passes(self):
        error, tolerance, _ = check_erf()
        assert error <= tolerance

    def test_erf_check_catches_a_corrupted_table(self):
        corrupted = ERFCX_COEFFICIENTS.copy()
        corrupted[-1] *= 1.01
        error, tolerance, _ = check_erf(corrupted)
        assert error > tolerance

    @pytest.mark.slow
    def test_fault_injection_fails_only_the_erf_check(self):
        corrupted = ERFCX_COEFFICIENTS.copy()
        corrupted[-1] *= 1.01
        results = {r.name: r.passed for r in run_checks(fast=True, erf_coefficients=corrupted)}
        assert results.pop('erf_reference') is False
        assert all(results.values())

    @pytest.mark.slow
    def test_fast_selftest_exit_code(self, tmp_path, capsys):
        assert main(['selftest', '--fast', '--out', str(tmp_path)]) == EXIT_OK
        assert 'checks passed' in capsys.readouterr().out
