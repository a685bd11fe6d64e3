import logging.config
from typing import Any

from .base import *  # noqa: F403
from .base import LOGGING


def configure_logging(level: str | None = None) -> None:
    """Apply the LOGGING dictConfig, optionally overriding the app log level."""
    config: dict[str, Any] = {**LOGGING, "loggers": dict(LOGGING["loggers"])}
    if level is not None:
        config["loggers"] = {
            name: {**logger_config, "level": level.upper()}
            for name, logger_config in LOGGING["loggers"].items()
        }
    logging.config.dictConfig(config)
