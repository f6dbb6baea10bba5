"""Seeded Monte Carlo studies of the estimator and the likelihood surface.

Every replication ``r`` draws its data from stream ``r`` of the master seed,
so runs are reproducible and replications can be computed in any order.
Trajectories for different sample sizes share the stream, i.e. the
``n = 250`` sample is a prefix of the ``n = 4000`` one.

Expectations under the true law (the per-sample KL gap, the mean conditional
log-probability at step ``n``) are replaced by averages over replications and
always reported with a standard error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .ar1 import DEFAULT_BOX, THETA_STAR, Theta, ThetaBox, simulate
from .filter import DEFAULT_NODES, log_likelihood, log_likelihood_terms
from .mle import EstimateConfig, estimate

__all__ = [
    "COORDINATES",
    "ConsistencyReport",
    "ProfileReport",
    "consistency_experiment",
    "likelihood_profile",
    "kl_gap_estimate",
    "gn_convergence_trace",
]

log = logging.getLogger(__name__)

COORDINATES = ("alpha", "mu", "sigma")


@dataclass
class ConsistencyReport:
    theta_star: Theta
    n_values: list[int]
    # errors[i, r, c]: |theta_hat - theta_star| for n_values[i], replication r, coordinate c
    errors: np.ndarray
    replications: int
    seed: int
    missing: int = 0
    # estimates[i][r], only populated with keep_estimates=True
    estimates: list | None = None

    def _quantile(self, q: float) -> np.ndarray:
        return np.nanquantile(self.errors, q, axis=1)

    @property
    def median(self) -> np.ndarray:
        """Median absolute error, shape ``(len(n_values), 3)``."""
        return self._quantile(0.5)

    @property
    def q90(self) -> np.ndarray:
        return self._quantile(0.9)

    def rows(self):
        """``(n, coordinate, quantile, value)`` rows."""
        med, q90 = self.median, self.q90
        for i, n in enumerate(self.n_values):
            for c, name in enumerate(COORDINATES):
                yield n, name, "median", float(med[i, c])
                yield n, name, "q90", float(q90[i, c])

    def to_dict(self) -> dict:
        med, q90 = self.median, self.q90
        return {
            "theta_star": self.theta_star.to_dict(),
            "n_values": [int(n) for n in self.n_values],
            "replications": int(self.replications),
            "seed": int(self.seed),
            "missing": int(self.missing),
            "per_parameter_error_quantiles": [
                {"n": int(n), "coordinate": name,
                 "median": float(med[i, c]), "q90": float(q90[i, c])}
                for i, n in enumerate(self.n_values)
                for c, name in enumerate(COORDINATES)
            ],
        }


@dataclass
class ProfileReport:
    axis: str
    grid: np.ndarray
    normalized_log_lik: np.ndarray

    @property
    def argmax(self) -> float:
        return float(self.grid[int(np.argmax(self.normalized_log_lik))])

    def rows(self):
        for g, v in zip(self.grid, self.normalized_log_lik):
            yield float(g), float(v)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "grid": [float(g) for g in self.grid],
            "normalized_log_lik": [float(v) if math.isfinite(v) else None
                                   for v in self.normalized_log_lik],
        }


def consistency_experiment(
    theta_star: Theta = THETA_STAR,
    box: ThetaBox = DEFAULT_BOX,
    n_values=(250, 1000, 4000),
    reps: int = 20,
    seed: int = 0,
    config: EstimateConfig | None = None,
    keep_estimates: bool = False,
) -> ConsistencyReport:
    """Estimate from ``reps`` simulated samples at each size in ``n_values``.

    A replication whose estimation raises is recorded as missing (NaN errors)
    and counted in ``ConsistencyReport.missing``.
    """
    if not box.contains(theta_star):
        raise ValueError("theta_star must lie in the box")
    if reps < 1:
        raise ValueError("reps must be positive")
    cfg = config or EstimateConfig()
    n_values = [int(n) for n in n_values]
    truth = theta_star.as_array()
    errors = np.full((len(n_values), reps, 3), np.nan)
    missing = 0
    kept = [[None] * reps for _ in n_values] if keep_estimates else None
    n_max = max(n_values)
    for r in range(reps):
        traj = simulate(theta_star, n_max, seed, stream=r)
        for i, n in enumerate(n_values):
            try:
                est = estimate(traj.y[: n + 1], box, cfg)
            except ValueError as exc:
                log.warning("replication %d at n=%d failed: %s", r, n, exc)
                missing += 1
                continue
            errors[i, r] = np.abs(est.theta_hat.as_array() - truth)
            if kept is not None:
                kept[i][r] = est
            log.info("rep %d n=%d theta_hat=%s", r, n, est.theta_hat)
    return ConsistencyReport(theta_star, n_values, errors, reps, seed, missing, kept)


_AXES = {"alpha": 0, "mu": 1, "sigma": 2}


def likelihood_profile(
    theta_star: Theta,
    y,
    axis: str,
    grid,
    m: int = DEFAULT_NODES,
) -> ProfileReport:
    """``(1/n) L_n`` along one coordinate axis through ``theta_star``.

    ``n`` is the number of transitions, ``len(y) - 1`` (or 1 for a single
    observation).
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {sorted(_AXES)}, got {axis!r}")
    grid = np.asarray(grid, dtype=float)
    n = max(len(y) - 1, 1)
    base = theta_star.as_array()
    vals = np.empty(len(grid))
    for i, g in enumerate(grid):
        v = base.copy()
        v[_AXES[axis]] = g
        vals[i] = log_likelihood(Theta.from_array(v), y, m) / n
    return ProfileReport(axis, grid, vals)


def kl_gap_estimate(
    theta_star: Theta,
    theta: Theta,
    n: int,
    reps: int = 20,
    seed: int = 0,
    m: int = DEFAULT_NODES,
) -> tuple[float, float]:
    """Mean and standard error of ``(L_n(theta_star) - L_n(theta)) / n`` under ``theta_star``.

    Both likelihoods are evaluated on the same trajectory, so the difference
    is exactly zero when ``theta == theta_star``.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    gaps = np.empty(reps)
    for r in range(reps):
        y = simulate(theta_star, n, seed, stream=r).y
        gaps[r] = (log_likelihood(theta_star, y, m) - log_likelihood(theta, y, m)) / n
    se = float(np.std(gaps, ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return float(np.mean(gaps)), se


def gn_convergence_trace(
    theta: Theta,
    theta_star: Theta,
    n_max: int,
    reps: int = 20,
    seed: int = 0,
    m: int = DEFAULT_NODES,
    return_se: bool = False,
):
    """Monte Carlo estimate of ``E[log S_n(theta; Y_0..Y_n)]`` for ``n = 0..n_max``.

    The expectation is under ``theta_star``. With ``return_se`` the standard
    errors are returned as a second array.
    """
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    terms = np.empty((reps, n_max + 1))
    for r in range(reps):
        y = simulate(theta_star, n_max, seed, stream=r).y
        terms[r] = log_likelihood_terms(theta, y, m)
    mean = terms.mean(axis=0)
    if return_se:
        se = terms.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.full(n_max + 1, np.nan)
        return mean, se
    return mean
