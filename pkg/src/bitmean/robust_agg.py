"""Row aggregators for the multivariate estimators.

All take an (n, d) row matrix and return a d-vector location estimate. The
corruption-rate hint eta_hint only sets trimming/removal budgets; no
aggregator needs it to be exact.
"""

from __future__ import annotations

import math

import numpy as np

from .core import validate_samples

__all__ = [
    "AGGREGATOR_IDS",
    "aggregate",
    "empirical_mean",
    "coordinatewise_trimmed",
    "geometric_median",
    "iterative_filter",
]

_COLLIDE = 1e-12


def _check_eta_hint(eta_hint: float) -> float:
    if not 0.0 <= eta_hint < 0.5:
        raise ValueError(f"eta_hint must be in [0, 1/2), got {eta_hint}")
    return float(eta_hint)


def empirical_mean(rows) -> np.ndarray:
    return validate_samples(rows).mean(axis=0)


def coordinatewise_trimmed(rows, eta_hint: float = 0.0) -> np.ndarray:
    """Per coordinate, drop the k largest and k smallest entries, then average.

    k = ceil((eta_hint + 1/sqrt(n)) * n); the 1/sqrt(n) slack absorbs
    sampling noise when the hint is exact. k is capped so at least one
    entry survives.
    """
    x = validate_samples(rows)
    eta = _check_eta_hint(eta_hint)
    n = x.shape[0]
    k = math.ceil((eta + 1.0 / math.sqrt(n)) * n - 1e-9)
    k = min(max(k, 0), (n - 1) // 2)
    srt = np.sort(x, axis=0, kind="stable")
    return srt[k : n - k, :].mean(axis=0)


def geometric_median(
    rows,
    tol: float = 1e-9,
    max_iter: int = 500,
    return_objectives: bool = False,
):
    """Minimizer of sum_i ||y - row_i|| by iteratively reweighted averaging.

    Stops when the objective decrease falls below tol (relative to the
    objective scale). An iterate that lands exactly on a data row is nudged
    by 1e-12 per coordinate so the reweighting stays finite.
    """
    x = validate_samples(rows)
    n = x.shape[0]
    if n == 1:
        y = x[0].copy()
        return (y, [0.0]) if return_objectives else y
    y = x.mean(axis=0)
    objectives: list[float] = []
    prev = math.inf
    for _ in range(max_iter):
        dist = np.linalg.norm(x - y, axis=1)
        obj = float(dist.sum())
        objectives.append(obj)
        if prev - obj <= tol * max(1.0, obj):
            break
        prev = obj
        if (dist < _COLLIDE).any():
            y = y + _COLLIDE
            dist = np.maximum(np.linalg.norm(x - y, axis=1), 1e-300)
        w = 1.0 / dist
        y = (w @ x) / w.sum()
    return (y, objectives) if return_objectives else y


def iterative_filter(rows, eta_hint: float = 0.0) -> np.ndarray:
    """Repeatedly drop the row farthest from the coordinatewise median, then average.

    Removes ceil(eta_hint * n) rows, recomputing the median after each
    removal; capped so at least one row survives. Distance ties drop the
    lowest index.
    """
    x = validate_samples(rows)
    eta = _check_eta_hint(eta_hint)
    n = x.shape[0]
    budget = min(math.ceil(eta * n - 1e-9), n - 1)
    alive = np.ones(n, dtype=bool)
    for _ in range(max(budget, 0)):
        med = np.median(x[alive], axis=0)
        dist = np.linalg.norm(x - med, axis=1)
        dist[~alive] = -1.0
        alive[int(np.argmax(dist))] = False
    return x[alive].mean(axis=0)


AGGREGATOR_IDS = (
    "empirical-mean",
    "coordinatewise-trimmed",
    "geometric-median",
    "iterative-filter",
)


def aggregate(name: str, rows, eta_hint: float = 0.0) -> np.ndarray:
    """Dispatch by aggregator id; unknown ids raise with the valid choices."""
    if name == "empirical-mean":
        return empirical_mean(rows)
    if name == "coordinatewise-trimmed":
        return coordinatewise_trimmed(rows, eta_hint)
    if name == "geometric-median":
        _check_eta_hint(eta_hint)
        return geometric_median(rows)
    if name == "iterative-filter":
        return iterative_filter(rows, eta_hint)
    raise ValueError(f"unknown aggregator {name!r}; expected one of {AGGREGATOR_IDS}")
