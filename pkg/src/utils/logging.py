"""Structured logging setup using structlog."""

import logging
import sys
from pathlib import Path
from typing import Any, TextIO

import numpy as np
import structlog

_log_stream: TextIO | None = None


def _plain_numbers(_: Any, __: str, event_dict: dict[str, Any]) -> dict[str, Any]:
    """Render numpy scalars and arrays as builtin numbers and lists."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            event_dict[key] = value.tolist()
        elif isinstance(value, complex):
            event_dict[key] = [value.real, value.imag]
    return event_dict


def setup_logging(
    log_level: str = "INFO",
    log_file: Path | None = None,
    json_format: bool = False,
) -> None:
    """Configure structured logging for the workbench.

    Log lines go to stderr (or ``log_file``) so that reports written to
    stdout stay machine-readable.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional path to a log file replacing stderr.
        json_format: If True, output JSON lines. If False, output console logs.
    """
    global _log_stream

    level = getattr(logging, log_level.upper())
    if _log_stream is not None and _log_stream is not sys.stderr:
        _log_stream.close()
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        _log_stream = open(log_file, "a")  # noqa: SIM115
    else:
        _log_stream = sys.stderr

    logging.basicConfig(format="%(message)s", stream=_log_stream, level=level)

    shared_processors: list[structlog.types.Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        _plain_numbers,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
    ]

    if json_format:
        processors: list[structlog.types.Processor] = [
            *shared_processors,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(),
        ]
    else:
        processors = [
            *shared_processors,
            structlog.dev.ConsoleRenderer(colors=log_file is None and _log_stream.isatty()),
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=_log_stream),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Get a logger bound to a module name."""
    logger = structlog.get_logger()
    if name:
        logger = logger.bind(logger_name=name)
    return logger
