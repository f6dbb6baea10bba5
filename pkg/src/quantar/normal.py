"""Gaussian density, distribution and interval probabilities.

Everything tail-sensitive is routed through the survival function of the
nearer tail, so interval masses far out in either tail keep their relative
accuracy instead of cancelling two numbers close to one.

The array functions are thin wrappers over :mod:`scipy.special`. The scalar
kernels at the bottom (``log_sf_scalar``, ``log_interval_std``) are compiled
with numba and used inside the likelihood filter's inner loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numba
import numpy as np
from scipy import special

__all__ = [
    "GaussianParams",
    "ContinuousLaw",
    "StandardNormal",
    "STANDARD_NORMAL",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "log_std_normal_sf",
    "interval_prob",
    "log_interval_prob",
    "mills_bounds",
    "log_sf_scalar",
    "log_interval_std",
]

INV_SQRT_2PI = 0.3989422804014327
LOG_SQRT_2PI = 0.9189385332046728
_SQRT1_2 = 0.7071067811865476


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    sd: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean!r}")
        if not (self.sd > 0 and math.isfinite(self.sd)):
            raise ValueError(f"sd must be positive and finite, got {self.sd!r}")

    @property
    def var(self) -> float:
        return self.sd * self.sd


class ContinuousLaw(Protocol):
    """Minimal interface of a continuous, strictly increasing CDF.

    The quantized-law routines only need these three methods, so any
    distribution can be plugged in. ``log_sf`` is used for tail ratios.
    """

    def cdf(self, x): ...

    def sf(self, x): ...

    def log_sf(self, x): ...


class StandardNormal:
    def cdf(self, x):
        return std_normal_cdf(x)

    def sf(self, x):
        return std_normal_sf(x)

    def log_sf(self, x):
        return log_std_normal_sf(x)

    def __repr__(self) -> str:
        return "StandardNormal()"


STANDARD_NORMAL = StandardNormal()


def _finite(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(np.isinf(arr)):
        raise ValueError("argument must be finite")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def std_normal_pdf(x):
    x = _finite(x)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * x * x))


def std_normal_cdf(x):
    x = _finite(x)
    return _out(special.ndtr(x))


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)``, computed without subtraction."""
    x = _finite(x)
    return _out(special.ndtr(-x))


def log_std_normal_sf(x):
    """``log(1 - Phi(x))``; finite for every finite ``x``.

    Accepts ``+-inf`` (giving ``-inf`` and ``0``).
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("argument must not be NaN")
    return _out(special.log_ndtr(-x))


def _standardize(lo, hi, params: GaussianParams):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
        raise ValueError("interval bounds must not be NaN")
    if np.any(lo > hi):
        raise ValueError("interval requires lo <= hi")
    return (lo - params.mean) / params.sd, (hi - params.mean) / params.sd


def interval_prob(lo, hi, params: GaussianParams = GaussianParams(0.0, 1.0)):
    """``P(lo <= N(mean, sd^2) < hi)``; bounds may be infinite."""
    a, b = _standardize(lo, hi, params)
    # Upper tail: sf(a) - sf(b); lower tail: cdf(b) - cdf(a). Pick whichever
    # pair is small, i.e. the side of zero the interval midpoint lies on.
    upper = special.ndtr(-a) - special.ndtr(-b)
    lower = special.ndtr(b) - special.ndtr(a)
    with np.errstate(invalid="ignore"):
        mid = np.where(np.isfinite(a) & np.isfinite(b), 0.5 * (a + b), np.where(np.isinf(a), b, a))
    p = np.where(mid > 0, upper, lower)
    p = np.where(a == b, 0.0, p)
    return _out(np.maximum(p, 0.0))


def log_interval_prob(lo, hi, params: GaussianParams = GaussianParams(0.0, 1.0)):
    """Natural log of :func:`interval_prob`, accurate where the probability underflows."""
    a, b = _standardize(lo, hi, params)
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = log_interval_std(a[idx], b[idx])
    return _out(out)


def mills_bounds(x: float) -> tuple[float, float]:
    """Elementary two-sided bounds on the Gaussian upper tail.

    For ``x > 0``::

        phi(x) * (1/x - 1/x**3)  <=  1 - Phi(x)  <=  phi(x) / x
    """
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"mills_bounds requires finite x > 0, got {x!r}")
    phi = INV_SQRT_2PI * math.exp(-0.5 * x * x)
    return phi * (1.0 / x - 1.0 / x**3), phi / x


# --- compiled scalar kernels --------------------------------------------------

_CF_SWITCH = 30.0
_CF_TERMS = 80


@numba.njit(cache=True)
def log_sf_scalar(x):
    """``log(1 - Phi(x))`` for a scalar, valid for all real x.

    Uses ``erfc`` until the tail nears the underflow threshold, then the
    continued fraction of the Mills ratio ``(1 - Phi(x)) / phi(x)``.
    """
    if x == math.inf:
        return -math.inf
    if x == -math.inf:
        return 0.0
    if x < 0.0:
        return math.log1p(-0.5 * math.erfc(-x * _SQRT1_2))
    if x < _CF_SWITCH:
        return math.log(0.5 * math.erfc(x * _SQRT1_2))
    t = x
    for k in range(_CF_TERMS, 0, -1):
        t = x + k / t
    return -0.5 * x * x - LOG_SQRT_2PI - math.log(t)


@numba.njit(cache=True)
def _log1mexp(d):
    # log(1 - exp(d)) for d <= 0
    if d > -0.6931471805599453:
        return math.log(-math.expm1(d))
    return math.log1p(-math.exp(d))


@numba.njit(cache=True)
def log_interval_std(a, b):
    """``log P(a <= Z < b)`` for standard normal ``Z`` and ``a <= b``."""
    if not a < b:
        return -math.inf
    if a >= 0.0:
        la = log_sf_scalar(a)
        return la + _log1mexp(log_sf_scalar(b) - la)
    if b <= 0.0:
        lb = log_sf_scalar(-b)
        return lb + _log1mexp(log_sf_scalar(-a) - lb)
    # Straddles zero: the probability is not small, subtracting both tails is safe.
    tails = 0.5 * math.erfc(-a * _SQRT1_2) + 0.5 * math.erfc(b * _SQRT1_2)
    return math.log1p(-tails)
