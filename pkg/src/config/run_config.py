import logging
import os
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from src.models.errors import ConfigError
from src.models.run_models import DEFAULT_TOLERANCES, RunConfig

logger = logging.getLogger(__name__)

TOL_ENV = "JC_SUSY_TOL"
LOG_LEVEL_ENV = "JC_SUSY_LOG_LEVEL"

FILE_KEYS = {
    "delta": float,
    "lambda": float,
    "n_max": int,
    "x_min": float,
    "x_max": float,
    "points": int,
    "tol_residual": float,
    "tol_grid": float,
    "format": str,
    "output": str,
}
TOLERANCE_KEYS = ("tol_residual", "tol_grid")


def get_log_level() -> int:
    """Log level from JC_SUSY_LOG_LEVEL, INFO when unset."""
    name = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ConfigError(f"{LOG_LEVEL_ENV}={name!r} is not a logging level.")
    return level


def _parse(key: str, raw: Any, source: str) -> Any:
    if key not in FILE_KEYS:
        raise ConfigError(f"Unknown config key {key!r} in {source}.")
    try:
        return FILE_KEYS[key](raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bad value {raw!r} for {key!r} in {source}: {e}") from e


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Parse a plain key=value config file.

    :param path: File path.
    :return: Typed values keyed by their config name.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Config file {path!r} does not exist.")
    values = dotenv_values(path)
    return {key: _parse(key, raw, path) for key, raw in values.items() if raw is not None}


def get_run_config(overrides: Optional[Dict[str, Any]] = None, config_file: Optional[str] = None) -> RunConfig:
    """
    Assemble the run configuration.

    Precedence, lowest first: built-in defaults, JC_SUSY_TOL, the config file, explicit overrides.

    :param overrides: Values from command-line flags; None entries are ignored.
    :param config_file: Optional key=value file.
    :return: Validated RunConfig.
    """
    merged: Dict[str, Any] = {}
    tolerances = dict(DEFAULT_TOLERANCES)

    env_tol = os.getenv(TOL_ENV)
    if env_tol:
        tolerances["tol_residual"] = _parse("tol_residual", env_tol, TOL_ENV)

    layers = []
    if config_file:
        layers.append(read_config_file(config_file))
    layers.append({key: value for key, value in (overrides or {}).items() if value is not None})

    for layer in layers:
        for key, value in layer.items():
            if key in TOLERANCE_KEYS:
                tolerances[key] = value
            elif key == "format":
                merged["output_format"] = value
            else:
                merged[key] = value

    try:
        config = RunConfig(**merged, tolerances=tolerances)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
    if any(value <= 0 for value in config.tolerances.values()):
        raise ConfigError("Tolerances must be positive.")
    logger.debug(f"Run config: {config.model_dump(by_alias=True)}")
    return config
