"""Logging configuration for the voxsel command line."""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import List, Optional

# CLI level names to logging constants
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class WarningCollector(logging.Handler):
    """Keeps the messages of WARNING and above emitted during one run.

    Only the message text is kept, so reports embedding it stay reproducible.
    """

    def __init__(self, max_buffer_size: int = 1000):
        super().__init__(level=logging.WARNING)
        self.max_buffer_size = max_buffer_size
        self.messages: List[str] = []

    def emit(self, record):
        """Emit a log record."""
        try:
            if len(self.messages) < self.max_buffer_size:
                self.messages.append(record.getMessage())
        except Exception:
            self.handleError(record)

    def clear(self) -> None:
        self.messages = []


def _remove_own_handlers(root_logger: logging.Logger) -> None:
    for handler in list(root_logger.handlers):
        if getattr(handler, "_voxsel_owned", False):
            root_logger.removeHandler(handler)
            handler.close()


def setup_logging(
    log_level: str = "warn",
    log_file: Optional[str] = None,
    enable_console: bool = True,
    enable_file_rotation: bool = True,
    max_file_size: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
) -> WarningCollector:
    """
    Set up logging for one command-line run.

    Args:
        log_level: One of error, warn, info, debug (console and file threshold)
        log_file: Path to an additional log file (optional)
        enable_console: Whether to log to standard error
        enable_file_rotation: Whether to rotate the log file by size
        max_file_size: Maximum size of log file before rotation
        backup_count: Number of backup files to keep

    Returns:
        WarningCollector holding the run's warnings for embedding in reports
    """
    try:
        numeric_level = LOG_LEVELS[log_level.lower()]
    except KeyError:
        raise ValueError(
            f"unknown log level '{log_level}' (expected one of {', '.join(LOG_LEVELS)})"
        ) from None

    root_logger = logging.getLogger()
    root_logger.setLevel(min(numeric_level, logging.WARNING))
    _remove_own_handlers(root_logger)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers: List[logging.Handler] = []

    # Console handler; standard output is reserved for command results
    if enable_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(formatter)
        handlers.append(console_handler)

    # File handler
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        if enable_file_rotation:
            file_handler = logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=max_file_size,
                backupCount=backup_count,
                encoding="utf-8",
            )
        else:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")

        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    collector = WarningCollector()
    handlers.append(collector)

    for handler in handlers:
        handler._voxsel_owned = True
        root_logger.addHandler(handler)

    # Set specific logger levels
    logging.getLogger("numba").setLevel(logging.WARNING)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging initialized - Level: {log_level}, File: {log_file}")

    return collector
