"""Order-statistic quantiles and the held-out split used by partial quantization.

Quantile convention (sup form): Q_p(X) = sup{a : P(X >= a) >= 1 - p}.
Empirically this is the k-th order statistic with k = ceil(p * m), clamped
to [1, m]. The split takes per-coordinate quantiles at levels eps and
1 - eps, then centers: mu1 = (alpha + beta) / 2, delta = (beta - alpha) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import validate_samples
from .samplers import DistributionSpec

__all__ = ["QuantileSplit", "empirical_quantile", "quantile_split", "population_quantile"]

# Absolute guard against float error in p * m when the true product is an
# integer (for example 0.8 * 10); the rounding error is orders of magnitude
# smaller than this for any realistic m.
_INDEX_GUARD = 1e-9


def _order_index(p: float, m: int) -> int:
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {p}")
    k = math.ceil(p * m - _INDEX_GUARD)
    return min(max(k, 1), m)


def empirical_quantile(values, p: float) -> float:
    """k-th smallest of values at k = clamp(ceil(p * m), 1, m)."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empirical_quantile: empty input")
    if np.isnan(arr).any():
        raise ValueError("empirical_quantile: NaN input")
    k = _order_index(p, arr.size)
    return float(np.sort(arr, kind="stable")[k - 1])


@dataclass(frozen=True)
class QuantileSplit:
    """Per-coordinate truncation bracket [alpha, beta] with center and radius."""

    alpha: np.ndarray
    beta: np.ndarray
    mu1: np.ndarray
    delta: np.ndarray

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "mu1", "delta"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
        if not (self.alpha.shape == self.beta.shape == self.mu1.shape == self.delta.shape):
            raise ValueError("QuantileSplit fields must share one shape")
        if np.any(self.alpha > self.beta):
            raise ValueError("QuantileSplit requires alpha <= beta coordinatewise")
        if not (
            np.allclose(self.mu1, (self.alpha + self.beta) / 2.0, rtol=1e-12, atol=1e-12)
            and np.allclose(self.delta, (self.beta - self.alpha) / 2.0, rtol=1e-12, atol=1e-12)
        ):
            raise ValueError("QuantileSplit center/radius inconsistent with bounds")

    @classmethod
    def from_bounds(cls, alpha, beta) -> "QuantileSplit":
        a = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
        b = np.atleast_1d(np.asarray(beta, dtype=np.float64))
        return cls(alpha=a, beta=b, mu1=(a + b) / 2.0, delta=(b - a) / 2.0)

    @property
    def d(self) -> int:
        return self.alpha.size


def quantile_split(held_out, eps: float) -> QuantileSplit:
    """Bracket each coordinate of the held-out block between its eps and 1-eps quantiles.

    Requires at least two held-out rows and eps strictly inside (0, 1/2);
    eps = 1/2 would collapse the bracket to a point by construction.
    """
    x = validate_samples(held_out)
    m = x.shape[0]
    if m < 2:
        raise ValueError(f"quantile_split needs >= 2 held-out rows, got {m}")
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must be in (0, 1/2), got {eps}")
    srt = np.sort(x, axis=0, kind="stable")
    k_lo = _order_index(eps, m)
    k_hi = _order_index(1.0 - eps, m)
    return QuantileSplit.from_bounds(srt[k_lo - 1, :], srt[k_hi - 1, :])


def population_quantile(dist: DistributionSpec, p: float, coord: int = 0) -> float:
    """Q_p of a distribution family, sup-form convention.

    Gaussian families use the coordinate marginal N(mean[coord], cov[coord, coord]);
    discrete families return the largest atom a with P(X >= a) >= 1 - p.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {p}")
    if dist.family == "gaussian":
        import statistics

        mean, var = dist.marginal(coord)
        return float(mean + math.sqrt(var) * statistics.NormalDist().inv_cdf(p))
    if dist.family == "three-point":
        points, masses = dist.atoms()
        order = np.argsort(points, kind="stable")
        points, masses = points[order], masses[order]
        tails = np.cumsum(masses[::-1])[::-1]  # tails[i] = P(X >= points[i])
        ok = tails >= (1.0 - p) - 1e-12
        if not ok.any():
            # p below the mass of the smallest atom's tail cannot happen (tail[0] = 1)
            raise ValueError("no atom satisfies the tail condition")
        return float(points[np.nonzero(ok)[0].max()])
    raise ValueError(f"unknown distribution family: {dist.family!r}")
