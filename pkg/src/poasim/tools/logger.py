"""
Logging configuration for poasim.

Console logging goes to stdout; file logging (optional) writes a daily
rotating log plus a size-capped error log. Simulation traces are not
logging output: they are written by ``poasim.net.trace`` so that they stay
byte-identical across repeats.

Usage:
    from poasim.tools.logger import get_logger

    logger = get_logger(__name__)
    logger.info("Sweep finished")
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler, TimedRotatingFileHandler
from pathlib import Path

CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
FILE_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s"
)
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Libraries that are chatty at INFO/DEBUG.
NOISY_LOGGERS = ("matplotlib", "PIL")


def setup_logging(
    log_level: int = logging.INFO,
    log_to_file: bool = False,
    log_dir: str = "logs",
    app_name: str = "poasim",
) -> None:
    """
    Set up logging for the command-line tools.

    Args:
        log_level: The logging level to use (default: logging.INFO)
        log_to_file: Whether to also log to rotating files (default: False)
        log_dir: Directory to store log files (default: "logs")
        app_name: Base name of the log files (default: "poasim")

    """
    # Create log directory if it doesn't exist
    if log_to_file:
        Path(log_dir).mkdir(parents=True, exist_ok=True)

    # Configure root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Remove existing handlers to avoid duplicate logs
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    # Console handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(console_handler)

    # Add file handlers if requested
    if log_to_file:
        file_formatter = logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT)

        # Daily rotating file handler
        file_handler = TimedRotatingFileHandler(
            os.path.join(log_dir, f"{app_name}.log"),
            when="midnight",
            backupCount=30,  # Keep logs for 30 days
        )
        file_handler.setLevel(log_level)
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)

        # Error log, capped by size
        error_file_handler = RotatingFileHandler(
            os.path.join(log_dir, f"{app_name}_error.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=10,
        )
        error_file_handler.setLevel(logging.ERROR)
        error_file_handler.setFormatter(file_formatter)
        root_logger.addHandler(error_file_handler)

    # Quiet third-party loggers
    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(log_level, logging.WARNING))


def get_logger(name: str, log_level: int | None = None) -> logging.Logger:
    """
    Get a logger with the given name.

    Args:
        name: The name of the logger (usually __name__)
        log_level: Optional specific log level for this logger

    Returns:
        logging.Logger: Configured logger instance

    """
    logger = logging.getLogger(name)

    if log_level is not None:
        logger.setLevel(log_level)

    return logger
