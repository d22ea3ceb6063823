from . import logging, message_utils, numbers

__all__ = [
    "logging",
    "message_utils",
    "numbers",
]
