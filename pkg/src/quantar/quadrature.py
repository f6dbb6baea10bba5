"""Gauss-Legendre rules on the unit observation cell."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["gauss_legendre_unit"]


@lru_cache(maxsize=None)
def _rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    u = 0.5 * x
    w = 0.5 * w
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def gauss_legendre_unit(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in ``(-1/2, 1/2)`` and weights summing to one, ``m`` points.

    Shift the nodes by ``k`` to integrate over the cell ``[k - 1/2, k + 1/2)``.
    Arrays are cached and read-only.
    """
    if m < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {m}")
    return _rule(int(m))
