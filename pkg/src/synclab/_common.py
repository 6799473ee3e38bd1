"""Small shared numeric helpers."""
from __future__ import annotations

import math


def round_half_up(x: float) -> int:
    """Nearest integer with halves rounded toward +inf (0.5 -> 1, -0.5 -> 0)."""
    return int(math.floor(x + 0.5))


def wrap_signed(value: int, n: int) -> int:
    """Wrap an index difference onto the signed cyclic range (-n/2, n/2]."""
    w = int(value) % n
    if w > n / 2:
        w -= n
    return w
