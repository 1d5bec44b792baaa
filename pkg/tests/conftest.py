"""Shared fixtures for the test-suite."""

import pytest

from src.models.state import QuadratureSpec, SearchSettings


@pytest.fixture
def spec():
    return QuadratureSpec()


@pytest.fixture
def coarse_spec():
    return QuadratureSpec(node_count=128)


@pytest.fixture
def fast_settings():
    return SearchSettings(restarts=2, max_evals=200, c3_scan_points=9, mu_scan_points=5)
