"""Small argument checkers shared across the package."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def check_probability_weight(weight, name: str = "weight") -> float:
    try:
        w = float(weight)
    except (TypeError, ValueError):
        raise TypeError(f"{name} must be a real number, got {weight!r}") from None
    if not math.isfinite(w) or w < 0.0 or w > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {weight!r}")
    return w


def check_mode_order(mode_order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(mode_order)
    if not order:
        raise ValueError("mode_order must not be empty")
    if len(set(order)) != len(order):
        raise ValueError(f"mode_order has repeated modes: {order}")
    for m in order:
        if not isinstance(m, str) or not m:
            raise TypeError(f"mode names must be non-empty strings, got {m!r}")
    return order


def check_bits(bits, length: int | None = None) -> tuple[int, ...]:
    """Accept ``"0101"``, ``(0, 1, 0, 1)`` or similar; return a tuple of ints."""
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"bit string must contain only 0/1, got {bits!r}")
        out = tuple(int(ch) for ch in bits)
    else:
        out = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in out):
            raise ValueError(f"bits must be 0 or 1, got {bits!r}")
    if length is not None and len(out) != length:
        raise ValueError(f"expected {length} bits, got {len(out)}")
    return out


def check_angles(angles, min_points: int = 1, name: str = "grid") -> np.ndarray:
    arr = np.asarray(angles, dtype=float).ravel()
    if arr.size < min_points:
        raise ValueError(f"{name} needs at least {min_points} points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)
