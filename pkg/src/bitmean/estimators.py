"""Mean estimators from one-bit measurements.

Full quantization: every sample is one bit per coordinate, scaled by a fixed
dither level. Partial quantization: a small held-out block is kept at full
precision to pick a truncation bracket, and only the remainder is quantized
against it. Robust variants randomize the held-out block and swap the bit
average for a pluggable aggregator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Interval, truncate, validate_bits, validate_samples
from .quantiles import QuantileSplit, empirical_quantile, quantile_split
from .quantizer import as_dither_levels, quantize_full_multi, quantize_partial
from .robust_agg import aggregate
from .samplers import choose_without_replacement, haar_orthogonal

__all__ = [
    "EstimatorConfig",
    "TrialReport",
    "full_1d",
    "full_multi",
    "full_multi_robust",
    "partial_bits",
    "estimate_from_bits",
    "partial_1d",
    "partial_1d_robust",
    "partial_multi",
    "partial_multi_robust",
    "haar_rotate_pipeline",
    "baseline_sample_mean",
    "baseline_trimmed_mean",
    "partial_bits_used",
    "full_bits_used",
    "raw_bits_used",
]


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs shared by the estimator family.

    n0 and epsilon drive the partial-quantization split; levels is the
    dither scale for full quantization (scalar broadcasts); aggregator names
    the robust row aggregator; haar marks the rotate-then-quantize pipeline.
    """

    n0: int = 0
    epsilon: float = 0.1
    levels: object | None = None
    aggregator: str | None = None
    haar: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must be in (0, 1/2), got {self.epsilon}")


def _check_holdout(n: int, n0: int) -> None:
    # the split needs >= 2 rows; the quantized block must dominate
    if n0 < 2:
        raise ValueError(f"held-out size n0 must be >= 2, got {n0}")
    if 2 * n0 > n:
        raise ValueError(f"held-out size must satisfy n0 <= n/2, got n0={n0}, n={n}")


# --- full quantization ------------------------------------------------------


def full_1d(bits, lam: float) -> float:
    """Average of lam * bit over a one-column bit matrix."""
    b = validate_bits(bits)
    if b.shape[1] != 1:
        raise ValueError(f"full_1d expects one column, got {b.shape[1]}")
    if not lam > 0:
        raise ValueError(f"dither level lam must be positive, got {lam}")
    return float(np.mean(b * lam))


def full_multi(bits, levels) -> np.ndarray:
    """Columnwise average of Diag(levels) applied to the bit rows."""
    b = validate_bits(bits)
    lam = as_dither_levels(levels, b.shape[1])
    return np.mean(b * lam, axis=0)


def full_multi_robust(bits, levels, aggregator: str, eta_hint: float = 0.0) -> np.ndarray:
    """Like full_multi but aggregating the scaled rows robustly."""
    b = validate_bits(bits)
    lam = as_dither_levels(levels, b.shape[1])
    return aggregate(aggregator, b * lam, eta_hint)


# --- partial quantization ---------------------------------------------------


def partial_bits(
    sample,
    cfg: EstimatorConfig,
    rng: np.random.Generator,
    random_holdout: bool = False,
) -> tuple[QuantileSplit, np.ndarray, np.ndarray]:
    """Split the sample into a held-out block and quantized bits.

    Returns (split, bits, holdout_indices). The held-out block is the first
    n0 rows, or a uniform subset when random_holdout is set (drawn before
    the dithers, so one stream fixes the whole pipeline).
    """
    x = validate_samples(sample)
    n = x.shape[0]
    _check_holdout(n, cfg.n0)
    if random_holdout:
        idx = np.sort(choose_without_replacement(n, cfg.n0, rng))
    else:
        idx = np.arange(cfg.n0, dtype=np.int64)
    keep = np.ones(n, dtype=bool)
    keep[idx] = False
    split = quantile_split(x[idx], cfg.epsilon)
    bits = quantize_partial(x[keep], split, rng)
    return split, bits, idx


def estimate_from_bits(
    split: QuantileSplit,
    bits,
    aggregator: str = "empirical-mean",
    eta_hint: float = 0.0,
) -> np.ndarray:
    """Aggregate Diag(delta) * bits and re-center by mu1."""
    b = validate_bits(bits)
    if b.shape[1] != split.d:
        raise ValueError(f"bit dimension {b.shape[1]} != split dimension {split.d}")
    return aggregate(aggregator, b * split.delta, eta_hint) + split.mu1


def partial_multi(sample, cfg: EstimatorConfig, rng: np.random.Generator) -> np.ndarray:
    """Partial-quantization mean estimate, one shared held-out block of the
    first n0 rows and a per-coordinate quantile split at level epsilon."""
    split, bits, _ = partial_bits(sample, cfg, rng, random_holdout=False)
    return estimate_from_bits(split, bits)


def partial_1d(sample, cfg: EstimatorConfig, rng: np.random.Generator) -> float:
    """Univariate partial-quantization estimate (first-n0 held-out block)."""
    x = validate_samples(sample)
    if x.shape[1] != 1:
        raise ValueError(f"partial_1d expects one column, got {x.shape[1]}")
    return float(partial_multi(x, cfg, rng)[0])


def partial_1d_robust(sample, cfg: EstimatorConfig, rng: np.random.Generator) -> float:
    """Univariate variant with the held-out block drawn uniformly without
    replacement, which keeps an adversary from loading the first rows."""
    x = validate_samples(sample)
    if x.shape[1] != 1:
        raise ValueError(f"partial_1d_robust expects one column, got {x.shape[1]}")
    split, bits, _ = partial_bits(x, cfg, rng, random_holdout=True)
    return float(estimate_from_bits(split, bits)[0])


def partial_multi_robust(
    sample,
    cfg: EstimatorConfig,
    rng: np.random.Generator,
    eta_hint: float = 0.0,
) -> np.ndarray:
    """Random held-out block plus a robust aggregator over the scaled rows.

    cfg.aggregator names the aggregator; with 'empirical-mean' this is the
    plain bit average over the randomized split.
    """
    if cfg.aggregator is None:
        raise ValueError("partial_multi_robust needs cfg.aggregator")
    split, bits, _ = partial_bits(sample, cfg, rng, random_holdout=True)
    return estimate_from_bits(split, bits, aggregator=cfg.aggregator, eta_hint=eta_hint)


# --- rotation pipeline ------------------------------------------------------


def haar_rotate_pipeline(
    sample,
    cfg: EstimatorConfig,
    rng: np.random.Generator,
    rotation: np.ndarray | None = None,
) -> np.ndarray:
    """Rotate by a Haar orthogonal matrix, fully quantize, rotate back.

    A random rotation spreads any single spiked coordinate across all of
    them, so one uniform dither level works where a per-coordinate budget
    would otherwise be needed. Pass rotation to pin the matrix in tests.
    """
    x = validate_samples(sample)
    d = x.shape[1]
    lam = as_dither_levels(cfg.levels, d)
    if rotation is None:
        rotation = haar_orthogonal(d, rng)
    else:
        rotation = np.asarray(rotation, dtype=np.float64)
        if rotation.shape != (d, d) or not np.allclose(rotation.T @ rotation, np.eye(d), atol=1e-8):
            raise ValueError("rotation must be a (d, d) orthogonal matrix")
    bits = quantize_full_multi(x @ rotation.T, lam, rng)
    return rotation.T @ full_multi(bits, lam)


# --- unquantized baselines --------------------------------------------------


def baseline_sample_mean(sample) -> np.ndarray:
    return validate_samples(sample).mean(axis=0)


def baseline_trimmed_mean(sample, eps_prime: float, xi: float) -> float:
    """Two-block trimmed mean: quantiles from the first floor(xi * n) samples
    at levels (eps_prime, 1 - eps_prime), then the mean of the remaining
    samples clamped into that bracket."""
    x = validate_samples(sample)
    if x.shape[1] != 1:
        raise ValueError(f"baseline_trimmed_mean expects one column, got {x.shape[1]}")
    if not 0.0 < eps_prime < 0.5:
        raise ValueError(f"eps_prime must be in (0, 1/2), got {eps_prime}")
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must be in (0, 1), got {xi}")
    values = x[:, 0]
    n = values.size
    m = int(np.floor(xi * n + 1e-9))
    if m < 2:
        raise ValueError(f"quantile block too small: floor(xi * n) = {m} < 2")
    if m >= n:
        raise ValueError("quantile block leaves no samples to average")
    alpha = empirical_quantile(values[:m], eps_prime)
    beta = empirical_quantile(values[:m], 1.0 - eps_prime)
    return float(np.mean(truncate(values[m:], Interval(alpha, beta))))


# --- per-trial accounting ---------------------------------------------------


def partial_bits_used(n: int, n0: int, d: int) -> int:
    """32 full-precision floats per held-out row, one bit per quantized cell."""
    return 32 * n0 * d + (n - n0) * d


def full_bits_used(n: int, d: int) -> int:
    return n * d


def raw_bits_used(n: int, d: int) -> int:
    """Unquantized baselines: 32 bits per cell."""
    return 32 * n * d


@dataclass(frozen=True)
class TrialReport:
    """One estimator run: estimate, target, error, and the bits consumed."""

    estimate: np.ndarray
    true_mean: np.ndarray
    err_l2: float
    bits_used: int
    seed: int

    def __post_init__(self) -> None:
        if self.err_l2 < 0:
            raise ValueError("err_l2 must be nonnegative")
        if self.bits_used < 0:
            raise ValueError("bits_used must be nonnegative")

    @classmethod
    def make(cls, estimate, true_mean, bits_used: int, seed: int) -> "TrialReport":
        est = np.atleast_1d(np.asarray(estimate, dtype=np.float64))
        mu = np.atleast_1d(np.asarray(true_mean, dtype=np.float64))
        if est.shape != mu.shape:
            raise ValueError(f"estimate shape {est.shape} != true mean shape {mu.shape}")
        return cls(
            estimate=est,
            true_mean=mu,
            err_l2=float(np.linalg.norm(est - mu)),
            bits_used=int(bits_used),
            seed=int(seed),
        )
