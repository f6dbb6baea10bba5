"""Integer quantizers.

Two conventions are used throughout the package:

* ``FLOOR`` maps ``x`` to ``k`` with ``k <= x < k + 1``.
* ``ROUND`` maps ``x`` to ``k`` with ``k - 1/2 <= x < k + 1/2``.

Cells are half-open and closed on the left, so half-integers round *up*
(``0.5 -> 1``, ``-0.5 -> 0``). This is not Python's ``round`` (half to even).
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "QuantizerKind",
    "floor_quantize",
    "round_quantize",
    "quantize",
    "cell_bounds",
]

# Largest magnitude for which every integer is exactly representable in a double.
_MAX_ABS = float(2**53)


class QuantizerKind(enum.Enum):
    FLOOR = "floor"
    ROUND = "round"

    @property
    def offset(self) -> float:
        """Left edge of cell ``k`` is ``k - offset``."""
        return 0.0 if self is QuantizerKind.FLOOR else 0.5


def _check(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot quantize non-finite value {x!r}")
    if abs(x) >= _MAX_ABS:
        raise ValueError(f"|x| = {abs(x):g} exceeds the exactly representable integer range")
    return x


def floor_quantize(x: float) -> int:
    return math.floor(_check(x))


def round_quantize(x: float) -> int:
    x = _check(x)
    k = math.floor(x)
    # x - k is exact for |x| < 2**53, so the comparison with 1/2 is too.
    return k + 1 if x - k >= 0.5 else k


def quantize(x, kind: QuantizerKind = QuantizerKind.ROUND) -> np.ndarray:
    """Vectorized quantizer; returns an ``int64`` array.

    Raises ``ValueError`` if any entry is non-finite or out of range.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot quantize non-finite values")
    if np.any(np.abs(arr) >= _MAX_ABS):
        raise ValueError("input exceeds the exactly representable integer range")
    if kind is QuantizerKind.FLOOR:
        return np.floor(arr).astype(np.int64)
    k = np.floor(arr)
    return (k + (arr - k >= 0.5)).astype(np.int64)


def cell_bounds(k: int, kind: QuantizerKind = QuantizerKind.ROUND) -> tuple[float, float]:
    """Return ``(lo, hi)`` of the half-open cell ``[lo, hi)`` mapped to ``k``."""
    lo = k - kind.offset
    return lo, lo + 1.0
