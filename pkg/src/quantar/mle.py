"""Maximum likelihood over the parameter box.

Two stages: an exhaustive tensor grid (inclusive of the box edges) picks an
incumbent, then Nelder-Mead polishes it. The simplex works in unbounded
coordinates obtained from the box by a per-axis affine-logistic map

    theta_i = lo_i + (hi_i - lo_i) * expit(u_i / scale)

so the box constraint never has to be enforced by a penalty. Axes whose
interval is degenerate (``lo == hi``) are held fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .ar1 import Theta, ThetaBox
from .filter import DEFAULT_NODES, log_likelihood

__all__ = ["Estimate", "EstimateConfig", "grid_search", "refine", "estimate", "ImpossibleObservations"]


class ImpossibleObservations(ValueError):
    """The observation sequence has zero likelihood at every grid point."""


@dataclass(frozen=True)
class EstimateConfig:
    grid_dims: tuple[int, int, int] = (7, 7, 7)
    tol: float = 1e-6
    xtol: float = 1e-7
    max_evals: int = 500
    nodes: int = DEFAULT_NODES
    logistic_scale: float = 1.0
    # Initial simplex edge as a fraction of each axis width.
    step: float = 0.05

    def to_dict(self) -> dict:
        return {
            "grid_dims": list(self.grid_dims),
            "tol": self.tol,
            "xtol": self.xtol,
            "max_evals": self.max_evals,
            "nodes": self.nodes,
            "logistic_scale": self.logistic_scale,
            "step": self.step,
        }


@dataclass
class Estimate:
    theta_hat: Theta
    log_lik: float
    n_obs: int
    evaluations: int
    converged: bool
    grid_argmax: Theta
    grid_log_lik: float = -math.inf
    config: EstimateConfig = field(default_factory=EstimateConfig)

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.to_dict(),
            "log_lik": _finite_or_none(self.log_lik),
            "n_obs": int(self.n_obs),
            "evaluations": int(self.evaluations),
            "converged": bool(self.converged),
            "grid_argmax": self.grid_argmax.to_dict(),
            "grid_log_lik": _finite_or_none(self.grid_log_lik),
            "config": self.config.to_dict(),
        }


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def _axis(lo: float, hi: float, k: int) -> np.ndarray:
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, k)


def _grid_search(y, box: ThetaBox, dims, m):
    if any(int(d) < 2 for d in dims):
        raise ValueError("every grid dimension must be at least 2")
    axes = [_axis(box.alpha_lo, box.alpha_hi, dims[0]),
            _axis(box.mu_lo, box.mu_hi, dims[1]),
            _axis(box.sigma_lo, box.sigma_hi, dims[2])]
    best, best_ll, count = None, -math.inf, 0
    # Lexicographic order with strict improvement gives the documented tie-break.
    for a in axes[0]:
        for mu in axes[1]:
            for s in axes[2]:
                ll = log_likelihood(Theta(a, mu, s), y, m)
                count += 1
                if ll > best_ll:
                    best, best_ll = Theta(float(a), float(mu), float(s)), ll
    if best is None:
        raise ImpossibleObservations("observation sequence impossible everywhere on grid")
    return best, best_ll, count


def grid_search(y, box: ThetaBox, dims=(7, 7, 7), m: int = DEFAULT_NODES) -> Theta:
    """Grid point with the largest log-likelihood.

    The grid includes both endpoints of every axis; a collapsed axis
    contributes its single value. Ties go to the lexicographically smallest
    ``(alpha, mu, sigma)``.
    """
    return _grid_search(y, box, dims, m)[0]


class _Reparam:
    def __init__(self, box: ThetaBox, scale: float):
        self.lo = box.lower
        self.hi = box.upper
        self.width = self.hi - self.lo
        self.free = np.flatnonzero(self.width > 0)
        self.scale = float(scale)
        self.box = box

    def to_u(self, theta: np.ndarray) -> np.ndarray:
        t = (theta[self.free] - self.lo[self.free]) / self.width[self.free]
        t = np.clip(t, 1e-9, 1 - 1e-9)
        return self.scale * special.logit(t)

    def to_theta(self, u: np.ndarray, base: np.ndarray) -> np.ndarray:
        v = base.copy()
        v[self.free] = self.lo[self.free] + self.width[self.free] * special.expit(u / self.scale)
        return np.clip(v, self.lo, self.hi)


def refine(
    y,
    start: Theta,
    box: ThetaBox,
    tol: float = 1e-6,
    m: int = DEFAULT_NODES,
    config: EstimateConfig | None = None,
) -> Estimate:
    """Nelder-Mead polish of ``start`` inside ``box``.

    Stops when the simplex's log-likelihood spread is below ``tol`` and its
    vertices agree to ``config.xtol`` in the unbounded coordinates, or when
    ``config.max_evals`` objective evaluations have been spent (then
    ``converged`` is False). The returned point is never worse than ``start``.
    """
    cfg = config or EstimateConfig(tol=tol, nodes=m)
    if not box.contains(start):
        raise ValueError("start point lies outside the box")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n_obs = len(y)
    base = start.as_array()
    start_ll = log_likelihood(start, y, m)
    evaluations = 1
    rp = _Reparam(box, cfg.logistic_scale)
    if rp.free.size == 0:
        return Estimate(start, start_ll, n_obs, evaluations, True, start, start_ll, cfg)

    def objective(u):
        nonlocal evaluations
        evaluations += 1
        ll = log_likelihood(Theta.from_array(rp.to_theta(u, base)), y, m)
        return -ll if math.isfinite(ll) else 1e300

    # Build the initial simplex in theta space, stepping toward the interior.
    u0 = rp.to_u(base)
    simplex = [u0]
    for i, ax in enumerate(rp.free):
        v = base.copy()
        t = (v[ax] - rp.lo[ax]) / rp.width[ax]
        v[ax] += (1.0 if t < 0.5 else -1.0) * cfg.step * rp.width[ax]
        u = u0.copy()
        u[i] = rp.to_u(v)[i]
        simplex.append(u)
    res = optimize.minimize(
        objective,
        u0,
        method="Nelder-Mead",
        options={
            "initial_simplex": np.array(simplex),
            "fatol": tol,
            "xatol": cfg.xtol,
            "maxfev": max(1, cfg.max_evals - 1),
            "maxiter": 10 * cfg.max_evals,
        },
    )
    converged = bool(res.success)
    cand = rp.to_theta(res.x, base)
    theta_hat = Theta.from_array(cand)
    ll = log_likelihood(theta_hat, y, m)
    evaluations += 1
    if not ll >= start_ll:
        theta_hat, ll = start, start_ll
    return Estimate(theta_hat, ll, n_obs, evaluations, converged, start, start_ll, cfg)


def estimate(y, box: ThetaBox, config: EstimateConfig | None = None) -> Estimate:
    """Grid search followed by simplex refinement."""
    cfg = config or EstimateConfig()
    if len(y) == 0:
        raise ValueError("observation sequence must be non-empty")
    start, grid_ll, count = _grid_search(y, box, cfg.grid_dims, cfg.nodes)
    est = refine(y, start, box, cfg.tol, cfg.nodes, cfg)
    est.evaluations += count
    est.grid_log_lik = grid_ll
    return est
