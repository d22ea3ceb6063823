import logging
import sys
from typing import Any, Callable, Optional

import numpy as np
import orjson
import structlog

from app.config import LOG_FLOAT_DIGITS, LOG_LEVEL


def orjson_dumps(v: Any, *, default: Optional[Callable[[Any], Any]] = None) -> str:
    return orjson.dumps(v, default=default, option=orjson.OPT_SERIALIZE_NUMPY).decode()


def _round(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, float):
        return round(value, LOG_FLOAT_DIGITS)
    if isinstance(value, (list, tuple)) and value and all(isinstance(v, (int, float)) for v in value):
        return [round(float(v), LOG_FLOAT_DIGITS) for v in value]
    return value


def round_numbers(_logger: Any, _method: str, event_dict: dict) -> dict:
    """Shorten floats and numeric vectors (weights, value points) in log records."""
    return {key: _round(value) for key, value in event_dict.items()}


def _renderer() -> list:
    if sys.stderr.isatty():
        return [structlog.dev.ConsoleRenderer(colors=True, exception_formatter=structlog.dev.plain_traceback)]
    return [structlog.processors.dict_tracebacks, structlog.processors.JSONRenderer(serializer=orjson_dumps)]


def configure_logging(level: int | str = LOG_LEVEL) -> None:
    """Configure structlog on top of stdlib logging.

    The CLI writes results to stdout, so records go to stderr. May be called again to change
    the level (the `--log-level` flag).
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr, force=True)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S", utc=True),
            structlog.stdlib.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            round_numbers,
            *_renderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )


configure_logging()


def get_logger(module: str, log_type: str) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(module).bind(module=module, type=log_type)
