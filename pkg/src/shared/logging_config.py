"""Logging configuration for isingvote."""

import logging
import sys
import uuid
from contextvars import ContextVar
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

# Context variable to store the run id of the current invocation
run_id_context: ContextVar[str] = ContextVar("run_id", default="")


class RunIdFilter(logging.Filter):
    """Filter that adds the run id to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id_context.get("")
        return True


class RunJsonFormatter(jsonlogger.JsonFormatter):
    """JSON formatter adding timestamp, level, service and run id."""

    def __init__(self, *args: Any, service: str = "", **kwargs: Any):
        super().__init__(*args, **kwargs)
        self.service = service

    def add_fields(
        self,
        log_record: Dict[str, Any],
        record: logging.LogRecord,
        message_dict: Dict[str, Any],
    ) -> None:
        """Add custom fields to the log record."""
        super().add_fields(log_record, record, message_dict)
        log_record["timestamp"] = self.formatTime(record)
        log_record["level"] = record.levelname
        log_record["run_id"] = getattr(record, "run_id", "")
        log_record["service"] = self.service


def setup_logging(
    name: str,
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    max_bytes: int = 10485760,  # 10MB
    backup_count: int = 5,
    json_format: bool = True,
    service: Optional[str] = None,
) -> logging.Logger:
    """Set up logging configuration.

    Console output goes to stderr; stdout carries result tables only.

    Args:
        name: Name of the logger
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Path to log file (optional)
        max_bytes: Maximum size of log file before rotation
        backup_count: Number of backup files to keep
        json_format: Emit JSON records instead of plain text
        service: Service name stamped on JSON records (defaults to name)

    Returns:
        Logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, log_level.upper()))

    # Repeated setup (tests, repeated CLI calls) must not stack handlers
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    if json_format:
        console_formatter: logging.Formatter = RunJsonFormatter(
            "%(timestamp)s %(level)s %(name)s %(run_id)s %(message)s", service=service or name
        )
    else:
        console_formatter = logging.Formatter(
            "%(asctime)s - %(levelname)s - %(message)s"
        )
    detailed_formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(console_formatter)
    console_handler.addFilter(RunIdFilter())
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            log_file, maxBytes=max_bytes, backupCount=backup_count
        )
        file_handler.setFormatter(detailed_formatter)
        file_handler.addFilter(RunIdFilter())
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def get_run_id() -> str:
    """Get the current run id."""
    return run_id_context.get("")


def set_run_id(run_id: Optional[str] = None) -> str:
    """Set a new run id in the context.

    Args:
        run_id: Optional run id to set. If None, generates a new one.

    Returns:
        The run id now in effect
    """
    rid = run_id or uuid.uuid4().hex[:12]
    run_id_context.set(rid)
    return rid
