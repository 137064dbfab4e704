"""Utility modules."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .logging import get_logger, setup_logging

__all__ = ["ConfigError", "RunConfig", "get_logger", "load_config", "parse_config", "setup_logging"]
