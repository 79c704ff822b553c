"""Shared primitives: truncation, uniform dither, and seeded RNG streams.

The key identity used throughout: for tau uniform on [-1, 1],
E[lam * sign(x + lam * tau)] equals x clamped to [-lam, lam]. Quantizers
implement the left-hand side; ``expected_dither_output`` is the closed form
used as the test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeededRng",
    "Interval",
    "make_rng",
    "truncate",
    "uniform_dither",
    "expected_dither_output",
    "validate_samples",
    "validate_bits",
]


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Derive a reproducible generator for (seed, path).

    Distinct paths give statistically independent streams; the same
    (seed, path) gives the identical draw sequence on every run. Philox is
    counter-based, so streams are stable regardless of scheduling.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SeededRng:
    """Explicit (seed, stream) pair naming one reproducible draw sequence."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream)

    def derive(self, *path: int) -> "SeededRng":
        """Child stream for a sub-task. Flat mixing, collision-free by spawn_key."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *path))
        # Fold the child entropy into a fresh stream id under the same seed.
        child = int(ss.generate_state(1, np.uint64)[0])
        return SeededRng(seed=self.seed, stream=child)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")


def truncate(x, iv: Interval):
    """Clamp x into [iv.lo, iv.hi]. Monotone and 1-Lipschitz; rejects NaN."""
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("truncate: NaN input")
    out = np.clip(arr, iv.lo, iv.hi)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def uniform_dither(rng: np.random.Generator, size=None):
    """Draw tau uniform on [-1, 1]; the whole interval, endpoints measure zero."""
    return rng.uniform(-1.0, 1.0, size=size)


def expected_dither_output(x, lam):
    """Conditional mean of lam * sign(x + lam * tau): x clamped to [-lam, lam]."""
    lam_arr = np.asarray(lam, dtype=np.float64)
    if np.any(lam_arr <= 0):
        raise ValueError("dither level lam must be positive")
    arr = np.asarray(x, dtype=np.float64)
    out = np.clip(arr, -lam_arr, lam_arr)
    return float(out) if out.ndim == 0 else out


def validate_samples(x) -> np.ndarray:
    """Return x as an (n, d) float64 matrix; rejects NaN/Inf and empty axes.

    1-D input is treated as a single-column sample.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"sample matrix must be 1-D or 2-D, got ndim={arr.ndim}")
    n, d = arr.shape
    if n < 1 or d < 1:
        raise ValueError(f"sample matrix must be non-empty, got shape={arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("sample matrix contains NaN or Inf")
    return arr


def validate_bits(b) -> np.ndarray:
    """Return b as an (n, d) float64 matrix with entries exactly +/-1."""
    arr = np.asarray(b, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"bit matrix must be non-empty 1-D or 2-D, got shape={np.shape(b)}")
    if not np.isin(arr, (-1.0, 1.0)).all():
        raise ValueError("bit matrix entries must be exactly +1 or -1")
    return arr
