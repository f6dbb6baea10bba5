"""Stable Gaussian AR(1) process observed through rounding.

    X_k = alpha * X_{k-1} + eps_k,   eps_k ~ N(mu, sigma^2) i.i.d.,
    X_{-1} = x_init (0 by default),  Y_k = q(X_k).

Randomness comes from a Philox (counter-based) stream keyed by
``(seed, stream)``; normals are produced by inverse-CDF transform, so a
replication's draws depend only on its seed and stream id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .normal import GaussianParams
from .quantizer import QuantizerKind, quantize

__all__ = [
    "Theta",
    "ThetaBox",
    "Trajectory",
    "DEFAULT_BOX",
    "THETA_STAR",
    "make_rng",
    "standard_normals",
    "simulate",
    "stationary_law",
    "bivariate_stationary",
]


@dataclass(frozen=True)
class Theta:
    alpha: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.mu, self.sigma])

    def to_dict(self) -> dict:
        return {"alpha": float(self.alpha), "mu": float(self.mu), "sigma": float(self.sigma)}

    @classmethod
    def from_array(cls, v) -> "Theta":
        return cls(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class ThetaBox:
    alpha_lo: float
    alpha_hi: float
    mu_lo: float
    mu_hi: float
    sigma_lo: float
    sigma_hi: float

    def __post_init__(self):
        if not (0.0 <= self.alpha_lo <= self.alpha_hi < 1.0):
            raise ValueError("box requires 0 <= alpha_lo <= alpha_hi < 1")
        if not (math.isfinite(self.mu_lo) and math.isfinite(self.mu_hi) and self.mu_lo <= self.mu_hi):
            raise ValueError("box requires finite mu_lo <= mu_hi")
        if not (0.0 < self.sigma_lo <= self.sigma_hi and math.isfinite(self.sigma_hi)):
            raise ValueError("box requires 0 < sigma_lo <= sigma_hi")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.alpha_lo, self.mu_lo, self.sigma_lo])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.alpha_hi, self.mu_hi, self.sigma_hi])

    def contains(self, theta: Theta) -> bool:
        v = theta.as_array()
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))

    def is_interior(self, theta: Theta) -> bool:
        v = theta.as_array()
        return bool(np.all(v > self.lower) and np.all(v < self.upper))

    def clamp(self, v) -> Theta:
        return Theta.from_array(np.clip(np.asarray(v, dtype=float), self.lower, self.upper))

    @classmethod
    def point(cls, theta: Theta) -> "ThetaBox":
        return cls(theta.alpha, theta.alpha, theta.mu, theta.mu, theta.sigma, theta.sigma)

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("alpha_lo", "alpha_hi", "mu_lo", "mu_hi", "sigma_lo", "sigma_hi")}


DEFAULT_BOX = ThetaBox(0.0, 0.9, -1.0, 1.0, 0.5, 2.0)
THETA_STAR = Theta(0.5, 0.2, 1.0)


@dataclass(frozen=True)
class Trajectory:
    x: np.ndarray
    y: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.y)


def make_rng(seed: int, stream=0) -> np.random.Generator:
    """Philox generator for substream ``stream`` (an int or tuple of ints) of ``seed``."""
    key = tuple(stream) if isinstance(stream, (tuple, list)) else (int(stream),)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


_U_SCALE = 2.0**-53


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals by inverse-CDF transform of 53-bit uniforms on (0, 1)."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return special.ndtri((k + 0.5) * _U_SCALE)


def simulate(theta: Theta, n: int, seed: int, stream=0, x_init: float = 0.0) -> Trajectory:
    """Simulate ``X_0 .. X_n`` and their rounded values ``Y_0 .. Y_n``.

    Trajectories from the same ``(seed, stream)`` are nested: the first
    ``n + 1`` states are identical for every longer run.
    """
    if not isinstance(theta, Theta):
        raise TypeError("theta must be a Theta")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    rng = make_rng(seed, stream)
    eps = theta.mu + theta.sigma * standard_normals(rng, n + 1)
    x, _ = signal.lfilter([1.0], [1.0, -theta.alpha], eps, zi=[theta.alpha * x_init])
    return Trajectory(x, quantize(x, QuantizerKind.ROUND), int(seed))


def stationary_law(theta: Theta) -> GaussianParams:
    """Limit law ``N(mu / (1 - alpha), sigma^2 / (1 - alpha^2))`` of ``X_n``."""
    a = theta.alpha
    return GaussianParams(theta.mu / (1.0 - a), theta.sigma / math.sqrt(1.0 - a * a))


def bivariate_stationary(theta: Theta) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the stationary pair ``(X_n, X_{n+1})``."""
    a = theta.alpha
    m = theta.mu / (1.0 - a)
    v = theta.sigma**2 / (1.0 - a * a)
    return np.array([m, m]), np.array([[v, a * v], [a * v, v]])
