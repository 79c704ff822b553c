"""One-bit dithered quantizers.

Each sample coordinate is reduced to sign(x + scale * tau) with tau uniform
on [-1, 1]; conditional on x the scaled bit averages to x clamped to the
scale interval. sign(0) is +1 throughout.
"""

from __future__ import annotations

import numpy as np

from .core import uniform_dither, validate_samples
from .quantiles import QuantileSplit

__all__ = [
    "as_dither_levels",
    "quantize_full_1d",
    "quantize_full_multi",
    "quantize_partial",
]


def _sign_pos(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0.0, 1.0, -1.0)


def _resolve_tau(shape, rng, tau):
    """Fresh dither per (sample, coordinate); an injected tau is for tests."""
    if tau is None:
        if rng is None:
            raise ValueError("provide rng (or an injected tau)")
        return uniform_dither(rng, size=shape)
    arr = np.broadcast_to(np.asarray(tau, dtype=np.float64), shape)
    if np.any(np.abs(arr) > 1.0):
        raise ValueError("dither values must lie in [-1, 1]")
    return arr


def as_dither_levels(levels, d: int) -> np.ndarray:
    """Normalize levels to a positive (d,) vector; scalars broadcast."""
    arr = np.asarray(levels, dtype=np.float64).ravel()
    if arr.size == 1:
        arr = np.full(d, float(arr[0]))
    if arr.size != d:
        raise ValueError(f"expected {d} dither levels, got {arr.size}")
    if not np.isfinite(arr).all() or np.any(arr <= 0.0):
        raise ValueError("dither levels must be positive and finite")
    return arr


def quantize_full_1d(x, lam: float, rng: np.random.Generator | None = None, tau=None):
    """sign(x + lam * tau) for scalar or array x; returns +/-1 of the same shape."""
    if not lam > 0:
        raise ValueError(f"dither level lam must be positive, got {lam}")
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("quantize_full_1d: NaN input")
    t = _resolve_tau(arr.shape, rng, tau)
    out = _sign_pos(arr + lam * t)
    return float(out) if arr.ndim == 0 else out


def quantize_full_multi(x, levels, rng: np.random.Generator | None = None, tau=None) -> np.ndarray:
    """Coordinatewise sign(x_j + lam_j * tau_j) over an (n, d) sample block."""
    arr = validate_samples(x)
    lam = as_dither_levels(levels, arr.shape[1])
    t = _resolve_tau(arr.shape, rng, tau)
    return _sign_pos(arr + lam * t)


def quantize_partial(x, split: QuantileSplit, rng: np.random.Generator | None = None, tau=None) -> np.ndarray:
    """sign((x - mu1) + delta * tau) against a held-out quantile split.

    A zero-radius coordinate degrades to the deterministic comparator
    sign(x - mu1); the dither draw still happens so streams stay aligned.
    """
    arr = validate_samples(x)
    if split.d != arr.shape[1]:
        raise ValueError(f"split dimension {split.d} != sample dimension {arr.shape[1]}")
    t = _resolve_tau(arr.shape, rng, tau)
    return _sign_pos((arr - split.mu1) + split.delta * t)
