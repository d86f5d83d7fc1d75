"""
log.py – logger factory.

Console records look like the bracketed tags the runner scripts print:

    [radial] bracket found: mu in [2.88, 5.76]

The library only ever logs at WARNING unless told otherwise; the command line
resolves ROBINLAB_LOG_LEVEL through ``parse_level`` and calls ``set_level``.
"""

from __future__ import annotations

import logging

_ROOT = "robinlab"
_FORMAT = "[%(tag)s] %(message)s"
_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
DEFAULT_LEVEL = "WARNING"


class _TagFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        name = record.name
        record.tag = name.rsplit(".", 1)[-1] if name != _ROOT else "robinlab"
        if record.levelno >= logging.WARNING:
            record.tag = f"{record.tag}:{record.levelname.lower()}"
        return True


def _configure_root() -> logging.Logger:
    root = logging.getLogger(_ROOT)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_TagFilter())
        root.addHandler(handler)
        root.setLevel(DEFAULT_LEVEL)
        root.propagate = False
    return root


def get_logger(name: str) -> logging.Logger:
    """Return the logger for a robinlab module (``robinlab.<tail>``)."""
    _configure_root()
    tail = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{_ROOT}.{tail}")


def parse_level(raw: str | None) -> str:
    """Level name for a user-supplied value; unknown or empty values give WARNING."""
    if raw is None or not raw.strip():
        return DEFAULT_LEVEL
    name = raw.strip().upper()
    if name not in _LEVELS:
        _configure_root().warning("ignoring unknown log level %r", raw)
        return DEFAULT_LEVEL
    return name


def set_level(level: int | str) -> None:
    _configure_root().setLevel(level)
