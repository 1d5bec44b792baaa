"""
Configuration Loader Utility
Loads the YAML configuration files and turns them into the typed settings
used by the bound solvers and the simulator.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from src.models.errors import InvalidConfigError
from src.models.state import QuadratureScheme, QuadratureSpec, SearchSettings


# Default config directory
CONFIG_DIR = Path(__file__).parent.parent.parent / 'config'

SEED_ENV_VAR = 'LQLIFT_SEED'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def load_config(config_name: str, config_dir: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load a YAML configuration file.

    Args:
        config_name: Name of the config file (without .yaml extension)
        config_dir: Optional custom config directory

    Returns:
        Dictionary containing the configuration

    Raises:
        InvalidConfigError: If the file is missing or is not valid YAML
    """
    if config_dir is None:
        config_dir = CONFIG_DIR

    config_path = Path(config_dir) / f"{config_name}.yaml"

    if not config_path.exists():
        raise InvalidConfigError(f"Configuration file not found: {config_path}")

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise InvalidConfigError(f"Invalid YAML in {config_path}: {e}") from e

    return config or {}


def load_bounds_config(config_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Load the bounds configuration."""
    return load_config('bounds_config', config_dir)


def load_simulation_config(config_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Load the simulation configuration."""
    return load_config('simulation_config', config_dir)


def get_config_value(config: Dict[str, Any], key_path: str, default: Any = None) -> Any:
    """
    Get a nested config value using dot notation.

    Example:
        >>> config = {'quadrature': {'node_count': 256}}
        >>> get_config_value(config, 'quadrature.node_count')
        256
    """
    value = config

    for key in key_path.split('.'):
        if isinstance(value, dict) and key in value:
            value = value[key]
        else:
            return default

    return value


def _typed(config: Dict[str, Any], key_path: str, cast, default):
    raw = get_config_value(config, key_path, default)
    try:
        return cast(raw)
    except (TypeError, ValueError) as e:
        raise InvalidConfigError(f"Config value '{key_path}' = {raw!r} is not a valid {cast.__name__}") from e


def _flag(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    raise ValueError(f"expected true/false, got {value!r}")


def quadrature_spec_from_config(config: Dict[str, Any], **overrides) -> QuadratureSpec:
    """QuadratureSpec from the `quadrature` section; keyword overrides win."""
    defaults = QuadratureSpec()
    values = dict(
        node_count=_typed(config, 'quadrature.node_count', int, defaults.node_count),
        scheme=_typed(config, 'quadrature.scheme', QuadratureScheme, defaults.scheme.value),
        tail_cut=_typed(config, 'quadrature.tail_cut', float, defaults.tail_cut),
        check_agreement=_typed(config, 'quadrature.check_agreement', _flag, defaults.check_agreement),
        agreement_tol=_typed(config, 'quadrature.agreement_tol', float, defaults.agreement_tol),
    )
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return QuadratureSpec(**values)
    except ValueError as e:
        raise InvalidConfigError(str(e)) from e


def search_settings_from_config(config: Dict[str, Any], **overrides) -> SearchSettings:
    """SearchSettings from the optimizer / search / bisection sections; keyword overrides win."""
    d = SearchSettings()
    values = dict(
        restarts=_typed(config, 'optimizer.restarts', int, d.restarts),
        max_evals=_typed(config, 'optimizer.max_evals', int, d.max_evals),
        xatol=_typed(config, 'optimizer.xatol', float, d.xatol),
        fatol=_typed(config, 'optimizer.fatol', float, d.fatol),
        c3_min=_typed(config, 'c3_search.c3_min', float, d.c3_min),
        c3_max=_typed(config, 'c3_search.c3_max', float, d.c3_max),
        c3_scan_points=_typed(config, 'c3_search.scan_points', int, d.c3_scan_points),
        c3_golden_tol=_typed(config, 'c3_search.golden_tol', float, d.c3_golden_tol),
        include_limit_endpoint=_typed(config, 'c3_search.include_limit_endpoint', _flag,
                                      d.include_limit_endpoint),
        mu_min=_typed(config, 'mu_search.mu_min', float, d.mu_min),
        mu_max=_typed(config, 'mu_search.mu_max', float, d.mu_max),
        mu_scan_points=_typed(config, 'mu_search.scan_points', int, d.mu_scan_points),
        mu_golden_tol=_typed(config, 'mu_search.golden_tol', float, d.mu_golden_tol),
        probe_mu_infinity=_typed(config, 'mu_search.probe_infinity', _flag, d.probe_mu_infinity),
        bisection_max_iter=_typed(config, 'bisection.max_iter', int, d.bisection_max_iter),
        beta_floor=_typed(config, 'bisection.beta_floor', float, d.beta_floor),
        rescan_step=_typed(config, 'bisection.rescan_step', float, d.rescan_step),
    )
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SearchSettings(**values)
    except ValueError as e:
        raise InvalidConfigError(str(e)) from e


def resolve_seed(cli_seed: Optional[int], config_seed: int = 0) -> int:
    """CLI seed over config seed; LQLIFT_SEED over both when set."""
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as e:
            raise InvalidConfigError(f"{SEED_ENV_VAR}={env!r} is not an integer") from e
    return config_seed if cli_seed is None else cli_seed


def config_hash(*configs: Dict[str, Any]) -> str:
    """Stable digest of the effective configuration, recorded in run manifests."""
    payload = json.dumps(list(configs), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]


def setup_logging(config: Optional[Dict[str, Any]] = None, level: Optional[str] = None):
    """Configure root logging from the `logging` section; `level` overrides it."""
    config = config or {}
    level_name = (level or get_config_value(config, 'logging.level', 'INFO')).upper()
    if not isinstance(logging.getLevelName(level_name), int):
        raise InvalidConfigError(f"Unknown log level '{level_name}'")
    logging.basicConfig(
        level=level_name,
        format=get_config_value(config, 'logging.format', LOG_FORMAT),
    )
    logging.getLogger().setLevel(level_name)
