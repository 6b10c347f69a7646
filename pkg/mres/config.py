"""
Runtime configuration for mres.

Values come from (lowest to highest priority) built-in defaults, a .env
file, process environment variables, and explicit overrides passed by the
CLI.
"""
import os
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_CAP = 24
DEFAULT_ENUM_CAP = 1 << 24
DEFAULT_SEARCH_MAX_LINES = 20000

ENV_VARS = {
    "exhaustive_cap": "MRES_EXHAUSTIVE_CAP",
    "enum_cap": "MRES_ENUM_CAP",
    "threads": "MRES_THREADS",
    "search_max_lines": "MRES_SEARCH_MAX_LINES",
}


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Config:
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP
    enum_cap: int = DEFAULT_ENUM_CAP
    threads: int = 1
    search_max_lines: int = DEFAULT_SEARCH_MAX_LINES
    search_max_width: Optional[int] = None
    search_max_map_size: Optional[int] = None

    def __post_init__(self):
        for name in ("exhaustive_cap", "enum_cap", "threads", "search_max_lines"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("search_max_width", "search_max_map_size"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 0):
                raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")

    def with_overrides(self, **overrides) -> "Config":
        """Return a copy with every non-None override applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self


def _read_int(env_name: str) -> Optional[int]:
    raw = os.environ.get(env_name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{env_name} must be an integer, got {raw!r}")


def load_config(env_file: Optional[Union[str, Path]] = None, **overrides) -> Config:
    """
    Build a Config from defaults, .env, environment and overrides.

    Args:
        env_file: Path to a .env file. Defaults to ./.env if present.
        **overrides: Field values that take precedence over the environment.

    Returns:
        Config: validated configuration
    """
    env_path = Path(env_file) if env_file else Path.cwd() / ".env"
    if env_path.exists():
        load_dotenv(dotenv_path=env_path)
        logger.debug(f"Loaded environment variables from {env_path}")
    elif env_file:
        raise ConfigError(f"env file not found: {env_file}")

    values = {"threads": default_threads()}
    for field_name, env_name in ENV_VARS.items():
        value = _read_int(env_name)
        if value is not None:
            values[field_name] = value

    config = Config(**values).with_overrides(**overrides)
    logger.debug(f"Configuration: {config}")
    return config
