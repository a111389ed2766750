"""
Logging configuration and command instrumentation.
"""
import functools
import logging
import sys
import time
from typing import Any, Callable

import structlog

from fpdiff.config import Settings, settings

logger = structlog.get_logger()


def configure_logging(config: Settings = settings) -> None:
    """Configure structlog from application settings."""
    level = logging.getLevelName(config.LOG_LEVEL.upper())
    if not isinstance(level, int):
        level = logging.INFO

    renderer: Any
    if config.LOG_FORMAT == "json":
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def log_command(name: str) -> Callable:
    """Log start, completion and duration of a CLI command handler."""

    def decorator(handler: Callable[..., int]) -> Callable[..., int]:
        @functools.wraps(handler)
        def wrapper(*args, **kwargs) -> int:
            start_time = time.time()

            # Log command
            logger.info("Command started", command=name)

            exit_code = handler(*args, **kwargs)

            # Calculate processing time
            process_time = time.time() - start_time

            logger.info(
                "Command completed",
                command=name,
                exit_code=exit_code,
                process_time=round(process_time, 4),
            )
            return exit_code

        return wrapper

    return decorator
