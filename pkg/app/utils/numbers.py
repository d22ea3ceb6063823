from fractions import Fraction
from typing import Any


def parse_probability(value: Any) -> float:
    """Parse a decimal number or a "p/q" rational string into a float.

    Rationals are converted exactly once, so "1/3" becomes the float nearest to 1/3.

    Raises:
        ValueError: If the value is neither a number nor a parseable string.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    raise ValueError(f"not a number: {value!r}")


def parse_bound(value: Any) -> int | None:
    """Step bound: a natural number, or None for "inf"/null."""
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "∞"):
            return None
        value = int(value)
    if isinstance(value, float):
        if value == float("inf"):
            return None
        if not value.is_integer():
            raise ValueError(f"step bound must be integral: {value!r}")
        value = int(value)
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"step bound must be a natural number: {value!r}")
    return value
