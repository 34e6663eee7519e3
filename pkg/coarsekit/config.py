"""
config.py

Runtime configuration for coarsekit.

Values come from the process environment; a `.env` file in the working
directory is loaded first (python-dotenv), so local overrides do not need to be
exported by hand.

- COARSEKIT_EXACT_CAP: largest point count for exhaustive subset scans (22)
- COARSEKIT_RETRY_CAP: retries for random regular generation (1000)
- COARSEKIT_WORKERS: thread count for per-component fan-out (4)
- COARSEKIT_LOG_LEVEL: logging level for the command line (WARNING)
"""

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv

from coarsekit.errors import ConfigError

load_dotenv()

DEFAULT_EXACT_CAP = 22
DEFAULT_RETRY_CAP = 1000
DEFAULT_WORKERS = 4
DEFAULT_LOG_LEVEL = "WARNING"


def _positive_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got '{raw}'")
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def exact_cap(override: Optional[int] = None) -> int:
    """Enumeration cap: an explicit override wins over the environment."""
    if override is not None:
        if override < 1:
            raise ConfigError(f"exact cap must be positive, got {override}")
        return override
    return _positive_int("COARSEKIT_EXACT_CAP", DEFAULT_EXACT_CAP)


def retry_cap() -> int:
    return _positive_int("COARSEKIT_RETRY_CAP", DEFAULT_RETRY_CAP)


def workers() -> int:
    return _positive_int("COARSEKIT_WORKERS", DEFAULT_WORKERS)


def configure_logging(level: Optional[str] = None) -> None:
    """Send log records to stderr; stdout is reserved for JSON reports."""
    name = (level or os.getenv("COARSEKIT_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level '{name}'")
    logging.basicConfig(
        stream=sys.stderr,
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
