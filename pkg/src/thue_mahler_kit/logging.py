"""One-line JSON logs.

Reports own stdout, so the handler writes to stderr unless a stream is given.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import UTC, datetime
from typing import TextIO

from .errors import ConfigError


class _JsonLineFormatter(logging.Formatter):
    def format(self: _JsonLineFormatter, record: logging.LogRecord) -> str:
        stamp = datetime.fromtimestamp(record.created, tz=UTC)
        payload: dict[str, str] = {
            "ts": stamp.isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }
        # search chunks log from pool threads
        if record.threadName is not None and record.threadName != "MainThread":
            payload["thread"] = record.threadName
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload, separators=(",", ":"))


def resolve_level(level: str) -> int:
    value = logging.getLevelNamesMapping().get(level.strip().upper())
    if value is None:
        raise ConfigError(f"LOG_LEVEL must be a logging level name, got {level!r}")
    return value


def setup_logging(level: str = "INFO", *, stream: TextIO | None = None) -> None:
    value = resolve_level(level)
    root = logging.getLogger()
    root.handlers.clear()
    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(_JsonLineFormatter())
    root.addHandler(handler)
    root.setLevel(value)
