from __future__ import annotations

import math
from decimal import ROUND_HALF_UP, Decimal
from typing import Any

__all__ = (
    "canonical_pair",
    "round_floats",
    "round_half_up",
    "round_sig",
)


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    """Order an unordered product pair lexicographically

    Args:
        a (str): product id
        b (str): product id

    Raises:
        ValueError: if `a` and `b` are the same product (pairs never form loops)

    Returns:
        tuple[str, str]: `(min(a, b), max(a, b))`
    """
    if a == b:
        raise ValueError(f"A pair needs two distinct products, given: {a}")
    return (a, b) if a < b else (b, a)


def round_half_up(value: float) -> int:
    """Round to the nearest integer with halves away from zero, so `round_half_up(810.5) == 811`
    where the builtin `round` gives 810.
    """
    return int(Decimal(repr(float(value))).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def round_sig(value: float, digits: int = 6) -> float:
    """Round `value` to `digits` significant digits. Non-finite values pass through"""
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def round_floats(obj: Any, digits: int = 6) -> Any:
    """Recursively round every float in a JSON-like structure to `digits` significant digits

    Args:
        obj (Any): dict/list/tuple tree of builtins
        digits (int, optional): significant digits. Defaults to 6.

    Returns:
        Any: a copy of `obj` with rounded floats. Tuples become lists.
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, digits)
    if isinstance(obj, dict):
        return {key: round_floats(value, digits) for key, value in obj.items()}
    if isinstance(obj, list | tuple):
        return [round_floats(value, digits) for value in obj]
    return obj
