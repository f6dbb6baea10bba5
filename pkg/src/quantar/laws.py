"""Quantized probability laws and numerical identifiability diagnostics.

A :class:`QuantizedLaw` is the pmf of ``q(sigma * X + mu)`` (or ``h``), stored
on a finite contiguous support plus the two leftover tail masses. The
diagnostic functions expose the quantities whose behavior separates scale and
shift parameters when only integer parts are observed:

* total variation between two quantized laws;
* ratios of upper-tail masses, which go to zero iff the scales differ;
* the shift profile ``F(k + mu2) - F(k)``, which would have to be a
  ``k``-independent constant if two shifted laws quantized identically;
* joint cell probabilities of ``(q(Z), q(alpha Z + eps))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .normal import (
    STANDARD_NORMAL,
    ContinuousLaw,
    GaussianParams,
    interval_prob,
    log_std_normal_sf,
    std_normal_cdf,
)
from .quadrature import gauss_legendre_unit
from .quantizer import QuantizerKind

__all__ = [
    "QuantizedLaw",
    "TailRatioReport",
    "quantized_law",
    "gaussian_quantized_law",
    "total_variation",
    "tail_ratio_sequence",
    "shift_constant_profile",
    "bivariate_quantized_law",
    "DEFAULT_TAIL_EPS",
]

DEFAULT_TAIL_EPS = 1e-12


@dataclass(frozen=True)
class QuantizedLaw:
    support_lo: int
    masses: np.ndarray
    left_tail: float
    right_tail: float

    @property
    def support_hi(self) -> int:
        """Last enumerated cell (inclusive)."""
        return self.support_lo + len(self.masses) - 1

    def mass(self, k: int) -> float:
        """Mass of cell ``k``; zero outside the enumerated support."""
        i = k - self.support_lo
        if 0 <= i < len(self.masses):
            return float(self.masses[i])
        return 0.0

    def total(self) -> float:
        return self.left_tail + math.fsum(self.masses) + self.right_tail

    def shifted(self, m: int) -> "QuantizedLaw":
        return QuantizedLaw(self.support_lo + m, self.masses, self.left_tail, self.right_tail)

    def to_dict(self) -> dict:
        return {
            "support_lo": int(self.support_lo),
            "masses": [float(p) for p in self.masses],
            "left_tail": float(self.left_tail),
            "right_tail": float(self.right_tail),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantizedLaw":
        return cls(int(d["support_lo"]), np.asarray(d["masses"], dtype=float),
                   float(d["left_tail"]), float(d["right_tail"]))


def _edge_probs(base: ContinuousLaw, mu: float, sigma: float, edges: np.ndarray):
    """Return (cdf, sf) of ``sigma X + mu`` at ``edges``."""
    z = (edges - mu) / sigma
    return np.asarray(base.cdf(z), dtype=float), np.asarray(base.sf(z), dtype=float)


def quantized_law(
    mu: float,
    sigma: float,
    kind: QuantizerKind = QuantizerKind.ROUND,
    tail_eps: float = DEFAULT_TAIL_EPS,
    base: ContinuousLaw = STANDARD_NORMAL,
) -> QuantizedLaw:
    """Law of the quantized image of ``sigma * X + mu`` where ``X ~ base``.

    Cells are enumerated outward from the one containing ``mu`` until the
    mass left in each tail is below ``tail_eps``.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if not math.isfinite(mu):
        raise ValueError(f"mu must be finite, got {mu!r}")
    if not (0.0 < tail_eps < 0.1):
        raise ValueError("tail_eps must lie in (0, 0.1)")

    off = kind.offset
    centre = math.floor(mu + off)

    def left_mass(k):  # P(X < k - off)
        return float(base.cdf((k - off - mu) / sigma))

    def right_mass(k):  # P(X >= k + 1 - off)
        return float(base.sf((k + 1 - off - mu) / sigma))

    lo = centre
    while left_mass(lo) >= tail_eps:
        lo -= max(1, int(sigma))
    hi = centre
    while right_mass(hi) >= tail_eps:
        hi += max(1, int(sigma))
    # Trim the coarse steps back to the tightest support meeting the threshold.
    while lo < centre and left_mass(lo + 1) < tail_eps:
        lo += 1
    while hi > centre and right_mass(hi - 1) < tail_eps:
        hi -= 1

    edges = np.arange(lo, hi + 2, dtype=float) - off
    cdf, sf = _edge_probs(base, mu, sigma, edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    upper = sf[:-1] - sf[1:]
    lower = cdf[1:] - cdf[:-1]
    masses = np.maximum(np.where(mid > mu, upper, lower), 0.0)
    return QuantizedLaw(int(lo), masses, float(cdf[0]), float(sf[-1]))


def gaussian_quantized_law(
    mu: float,
    sigma: float,
    kind: QuantizerKind = QuantizerKind.ROUND,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> QuantizedLaw:
    """Law of ``q(N(mu, sigma^2))`` (or ``h`` for ``kind=FLOOR``)."""
    return quantized_law(mu, sigma, kind, tail_eps, STANDARD_NORMAL)


def total_variation(a: QuantizedLaw, b: QuantizedLaw) -> float:
    """Total variation distance over the union support.

    Each law's tails are treated as two extra pseudo-cells; both left tails
    share one pseudo-cell and likewise on the right. The error this makes is
    bounded by the tail masses themselves.
    """
    lo = min(a.support_lo, b.support_lo)
    hi = max(a.support_hi, b.support_hi)
    pa = np.zeros(hi - lo + 1)
    pb = np.zeros(hi - lo + 1)
    pa[a.support_lo - lo: a.support_hi - lo + 1] = a.masses
    pb[b.support_lo - lo: b.support_hi - lo + 1] = b.masses
    diff = math.fsum(np.abs(pa - pb))
    diff += abs(a.left_tail - b.left_tail) + abs(a.right_tail - b.right_tail)
    return min(1.0, 0.5 * diff)


@dataclass
class TailRatioReport:
    n_values: np.ndarray
    ratios: np.ndarray
    log_ratios: np.ndarray
    underflow: np.ndarray

    def rows(self):
        for n, r, lr, f in zip(self.n_values, self.ratios, self.log_ratios, self.underflow):
            yield int(n), float(r), float(lr), bool(f)

    def to_dict(self) -> dict:
        return {
            "n_values": [int(n) for n in self.n_values],
            "ratios": [float(r) for r in self.ratios],
            "log_ratios": [None if not math.isfinite(x) else float(x) for x in self.log_ratios],
            "underflow": [bool(f) for f in self.underflow],
        }


def tail_ratio_sequence(
    params_1: GaussianParams,
    params_2: GaussianParams,
    n_max: int,
    kind: QuantizerKind = QuantizerKind.FLOOR,
    n_min: int = 0,
) -> TailRatioReport:
    """Ratios ``r1_n / r2_n`` of upper-tail masses ``r_n = sum_{j >= n} p_j``.

    ``r_n`` is the probability of landing at or beyond the left edge of cell
    ``n``, which is a plain Gaussian survival probability; it is evaluated in
    log space, so ``n`` can go far beyond any enumerable support. Where the
    denominator's log is not representable the ratio is ``+inf`` and the
    ``underflow`` flag is set.
    """
    n = np.arange(n_min, n_max + 1)
    edge = n - kind.offset
    l1 = np.asarray(log_std_normal_sf((edge - params_1.mean) / params_1.sd), dtype=float)
    l2 = np.asarray(log_std_normal_sf((edge - params_2.mean) / params_2.sd), dtype=float)
    bad = ~np.isfinite(l2)
    with np.errstate(invalid="ignore"):
        log_r = np.where(bad, np.inf, l1 - l2)
    ratios = np.exp(log_r)
    return TailRatioReport(n, ratios, log_r, bad)


def shift_constant_profile(
    mu2: float,
    k_lo: int,
    k_hi: int,
    base: GaussianParams = GaussianParams(0.0, 1.0),
) -> np.ndarray:
    """``F(k + mu2) - F(k)`` for ``k = k_lo .. k_hi``, ``F`` the CDF of ``base``.

    Computed as a signed interval probability so that far-tail entries are
    not lost to cancellation.
    """
    if k_lo > k_hi:
        raise ValueError("k_lo must not exceed k_hi")
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    if mu2 == 0:
        return np.zeros(len(k))
    if mu2 > 0:
        return np.asarray(interval_prob(k, k + mu2, base), dtype=float)
    return -np.asarray(interval_prob(k + mu2, k, base), dtype=float)


def bivariate_quantized_law(
    alpha: float,
    noise: GaussianParams,
    z_law: GaussianParams,
    cell_z: int,
    y_cells,
    m: int = 32,
) -> np.ndarray:
    """``P(q(Z) = cell_z, q(alpha Z + eps) = y)`` for each ``y`` in ``y_cells``.

    ``Z ~ z_law`` and ``eps ~ noise`` are independent. The outer integral over
    the ``Z`` cell uses the same Gauss-Legendre rule as the likelihood filter.
    """
    y = np.asarray(list(y_cells), dtype=float)
    if y.size == 0:
        raise ValueError("y_cells must be non-empty")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    u, w = gauss_legendre_unit(m)
    z = cell_z + u
    dens = np.exp(-0.5 * ((z - z_law.mean) / z_law.sd) ** 2) / (z_law.sd * math.sqrt(2 * math.pi))
    centre = alpha * z[None, :] + noise.mean
    a = (y[:, None] - 0.5 - centre) / noise.sd
    b = (y[:, None] + 0.5 - centre) / noise.sd
    # upper- or lower-tail difference depending on which side the cell sits
    upper = std_normal_cdf(-a) - std_normal_cdf(-b)
    lower = std_normal_cdf(b) - std_normal_cdf(a)
    cond = np.where(a + b > 0, upper, lower)
    return cond @ (w * dens)
