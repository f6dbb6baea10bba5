"""Exact log-likelihood of rounded AR(1) observations.

Given ``Y_0 .. Y_{k-1}`` the hidden state ``X_{k-1}`` is confined to the cell
``[y_{k-1} - 1/2, y_{k-1} + 1/2)``. Its conditional density is carried at the
``m`` Gauss-Legendre nodes of that cell. One step of the recursion is

    S_k       = sum_j w_j p_j P(alpha x_j + mu + sigma Z in cell(y_k))
    p'(x')    ~ sum_j w_j p_j phi((x' - alpha x_j - mu) / sigma)   on cell(y_k)

and the log-likelihood is ``sum_k log S_k``. The transition kernel is analytic
on the cell so the rule converges very fast in ``m``; 32 nodes is the default.

The inner loop is compiled with numba. :class:`FilterState` and the
``init_filter`` / ``filter_step`` pair expose the same kernels one step at a
time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .ar1 import Theta, make_rng, standard_normals
from .normal import log_interval_std
from .quadrature import gauss_legendre_unit

__all__ = [
    "DEFAULT_NODES",
    "LOG_PROB_FLOOR",
    "FilterState",
    "init_filter",
    "filter_step",
    "log_likelihood",
    "log_likelihood_terms",
    "mc_likelihood_oracle",
]

DEFAULT_NODES = 32
# A single conditional probability below 1e-180 marks the state degenerate.
LOG_PROB_FLOOR = math.log(1e-180)


@numba.njit(cache=True)
def _init_kernel(mean, sigma, y0, u, w, dens_out):
    m = u.shape[0]
    log_s = log_interval_std((y0 - 0.5 - mean) / sigma, (y0 + 0.5 - mean) / sigma)
    emax = -math.inf
    for i in range(m):
        z = (y0 + u[i] - mean) / sigma
        dens_out[i] = -0.5 * z * z
        if dens_out[i] > emax:
            emax = dens_out[i]
    total = 0.0
    for i in range(m):
        dens_out[i] = math.exp(dens_out[i] - emax)
        total += w[i] * dens_out[i]
    for i in range(m):
        dens_out[i] /= total
    return log_s


@numba.njit(cache=True)
def _step_kernel(cell, dens, alpha, mu, sigma, y_next, u, w, dens_out, mass, means):
    m = u.shape[0]
    lo = y_next - 0.5
    hi = y_next + 0.5
    lmax = -math.inf
    for j in range(m):
        means[j] = alpha * (cell + u[j]) + mu
        mass[j] = w[j] * dens[j]
        dens_out[j] = -math.inf
        if mass[j] > 0.0:
            dens_out[j] = math.log(mass[j]) + log_interval_std((lo - means[j]) / sigma,
                                                               (hi - means[j]) / sigma)
        if dens_out[j] > lmax:
            lmax = dens_out[j]
    if lmax == -math.inf:
        return -math.inf
    acc = 0.0
    for j in range(m):
        acc += math.exp(dens_out[j] - lmax)
    log_s = lmax + math.log(acc)

    # Scale by the largest possible exponent: the gap between the node range
    # and the range of predicted means.
    inv = 1.0 / sigma
    mlo = min(means[0], means[m - 1])
    mhi = max(means[0], means[m - 1])
    gap = max(0.0, y_next + u[0] - mhi, mlo - (y_next + u[m - 1]))
    emax = -0.5 * (gap * inv) ** 2
    total = 0.0
    for i in range(m):
        x = y_next + u[i]
        g = 0.0
        for j in range(m):
            z = (x - means[j]) * inv
            g += mass[j] * math.exp(-0.5 * z * z - emax)
        dens_out[i] = g
        total += w[i] * g
    if not total > 0.0:
        return -math.inf
    for i in range(m):
        dens_out[i] /= total
    return log_s


@numba.njit(cache=True)
def _terms_kernel(alpha, mu, sigma, x_init, y, u, w, floor, terms):
    m = u.shape[0]
    n = y.shape[0]
    dens = np.empty(m)
    nxt = np.empty(m)
    mass = np.empty(m)
    means = np.empty(m)
    for k in range(n):
        terms[k] = 0.0
    ls = _init_kernel(alpha * x_init + mu, sigma, y[0], u, w, dens)
    if not ls >= floor:
        terms[0] = -math.inf
        return
    terms[0] = ls
    for k in range(1, n):
        ls = _step_kernel(y[k - 1], dens, alpha, mu, sigma, y[k], u, w, nxt, mass, means)
        if not ls >= floor:
            terms[k] = -math.inf
            return
        terms[k] = ls
        dens, nxt = nxt, dens


@dataclass(frozen=True)
class FilterState:
    cell: int
    nodes: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    log_lik: float
    degenerate: bool = False

    @property
    def m(self) -> int:
        return len(self.nodes)


def _as_obs(y) -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("observation sequence must be a non-empty 1-D sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError("observations must be integers")
    return arr.astype(np.float64)


def _degenerate(cell, u, w) -> FilterState:
    return FilterState(int(cell), cell + u, w, np.zeros(len(u)), -math.inf, True)


def init_filter(theta: Theta, y0: int, m: int = DEFAULT_NODES, x_init: float = 0.0) -> FilterState:
    """Filter state after the first observation: ``S_0 = P(Y_0 = y0)``."""
    u, w = gauss_legendre_unit(m)
    dens = np.empty(m)
    ls = _init_kernel(theta.alpha * x_init + theta.mu, theta.sigma, float(y0), u, w, dens)
    if not ls >= LOG_PROB_FLOOR:
        return _degenerate(y0, u, w)
    return FilterState(int(y0), y0 + u, w, dens, ls)


def filter_step(state: FilterState, theta: Theta, y_next: int) -> FilterState:
    """Absorb one more observation. Degenerate states are returned unchanged."""
    if state.degenerate:
        return state
    m = state.m
    u, w = gauss_legendre_unit(m)
    out = np.empty(m)
    ls = _step_kernel(float(state.cell), state.density, theta.alpha, theta.mu, theta.sigma,
                      float(y_next), u, w, out, np.empty(m), np.empty(m))
    if not ls >= LOG_PROB_FLOOR:
        return _degenerate(y_next, u, w)
    return FilterState(int(y_next), y_next + u, w, out, state.log_lik + ls)


def log_likelihood_terms(theta: Theta, y, m: int = DEFAULT_NODES, x_init: float = 0.0) -> np.ndarray:
    """Per-observation ``log S_k``; the first ``-inf`` marks a degenerate step."""
    if not isinstance(theta, Theta):
        raise TypeError("theta must be a Theta")
    obs = _as_obs(y)
    u, w = gauss_legendre_unit(m)
    terms = np.empty(len(obs))
    _terms_kernel(theta.alpha, theta.mu, theta.sigma, float(x_init), obs, u, w, LOG_PROB_FLOOR, terms)
    return terms


def log_likelihood(theta: Theta, y, m: int = DEFAULT_NODES, x_init: float = 0.0) -> float:
    """``log P(Y_0 = y_0, ..., Y_n = y_n)`` under ``theta``; ``-inf`` if impossible."""
    return float(np.sum(log_likelihood_terms(theta, y, m, x_init)))


def mc_likelihood_oracle(
    theta: Theta,
    y,
    samples: int,
    seed: int,
    x_init: float = 0.0,
    chunk: int = 2_000_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of ``P(Y_0 = y_0, ..., Y_n = y_n)`` with its binomial standard error.

    Paths are simulated forward and dropped as soon as they leave the
    observed cell, so only survivors consume random numbers.
    """
    obs = _as_obs(y)
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = make_rng(seed, 0)
    hits = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        x = np.full(size, float(x_init))
        for yk in obs:
            x = theta.alpha * x + theta.mu + theta.sigma * standard_normals(rng, len(x))
            x = x[(x >= yk - 0.5) & (x < yk + 0.5)]
            if x.size == 0:
                break
        hits += x.size
        done += size
    p = hits / samples
    return p, math.sqrt(p * (1.0 - p) / samples)
