"""
JSON-lines logging for clinproj.

Records go to stderr so command output on stdout stays machine-readable.
Structured ``extra=`` fields are merged into each line; numpy scalars and
arrays from solver and training stats are converted to plain JSON values.
"""

import json
import logging
import sys
from datetime import datetime
from typing import Any, Optional, TextIO

import numpy as np

# Attributes every LogRecord carries; anything else came in through ``extra=``.
_STANDARD_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}

_QUIET_LOGGERS = ("sklearn", "matplotlib")


def _to_json(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    return str(value)


class JSONFormatter(logging.Formatter):
    """
    Formatter that outputs JSON strings after parsing the LogRecord.
    """

    def format(self, record: logging.LogRecord) -> str:
        log_record = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "file": record.filename,
            "line": record.lineno,
            "function": record.funcName,
        }

        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)

        extras = {k: v for k, v in vars(record).items() if k not in _STANDARD_ATTRS}
        for key, value in extras.items():
            log_record.setdefault(key, value)

        return json.dumps(log_record, default=_to_json)


def setup_logging(level: str = "INFO", stream: Optional[TextIO] = None) -> None:
    """
    Route the root logger through one JSON handler.

    Args:
        level: Root log level name
        stream: Destination; defaults to stderr
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JSONFormatter())
    root_logger.addHandler(handler)

    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
