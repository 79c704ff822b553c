"""Adversarial corruption, before sampling-to-bits (pre) or on the bits (post).

Every pattern touches at most floor(eta * n) rows and returns a corrupted
copy plus the realized row mask; inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import validate_bits, validate_samples
from .samplers import choose_without_replacement

__all__ = ["CorruptionSpec", "PRE_PATTERNS", "POST_PATTERNS", "corruption_budget", "corrupt_pre", "corrupt_post"]

PRE_PATTERNS = ("reflect-largest", "shift-all-ones")
POST_PATTERNS = ("flip-random", "flip-directional")


@dataclass(frozen=True)
class CorruptionSpec:
    stage: str  # "pre" | "post"
    eta: float
    pattern: str
    mask: np.ndarray | None = None  # realized row indices, filled by the corrupt functions

    def __post_init__(self) -> None:
        if self.stage not in ("pre", "post"):
            raise ValueError(f"stage must be 'pre' or 'post', got {self.stage!r}")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError(f"eta must be in [0, 1/2), got {self.eta}")
        allowed = PRE_PATTERNS if self.stage == "pre" else POST_PATTERNS
        if self.pattern not in allowed:
            raise ValueError(f"pattern {self.pattern!r} not valid for stage {self.stage!r}; expected one of {allowed}")


def corruption_budget(eta: float, n: int) -> int:
    """floor(eta * n), guarded against float error when eta * n is an integer."""
    return int(math.floor(eta * n + 1e-9))


def corrupt_pre(sample, spec: CorruptionSpec, true_mean, rng: np.random.Generator):
    """Apply a pre-quantization pattern; returns (corrupted copy, mask).

    reflect-largest (d = 1 only): the m largest samples become 2 * mu - x,
    ties broken toward the larger index. shift-all-ones: m uniformly chosen
    rows gain +1 in every coordinate.
    """
    if spec.stage != "pre":
        raise ValueError("corrupt_pre needs a stage='pre' spec")
    x = validate_samples(sample)
    n, d = x.shape
    m = min(corruption_budget(spec.eta, n), n)
    out = x.copy()
    if m == 0:
        return out, np.empty(0, dtype=np.int64)
    if spec.pattern == "reflect-largest":
        if d != 1:
            raise ValueError("reflect-largest is a univariate pattern (d = 1)")
        mu = float(np.asarray(true_mean, dtype=np.float64).ravel()[0])
        order = np.argsort(x[:, 0], kind="stable")
        mask = np.sort(order[n - m :]).astype(np.int64)
        out[mask, 0] = 2.0 * mu - out[mask, 0]
    else:  # shift-all-ones
        mask = np.sort(choose_without_replacement(n, m, rng))
        out[mask, :] += 1.0
    return out, mask


def corrupt_post(
    bits,
    spec: CorruptionSpec,
    rng: np.random.Generator,
    coord: int = 0,
    n_total: int | None = None,
):
    """Apply a post-quantization pattern to a bit matrix; returns (copy, mask).

    The adversary's budget is floor(eta * n_total) where n_total is the full
    sample size (bits may be only the non-held-out part); the realized count
    is additionally capped by the rows actually present. flip-random negates
    whole rows; flip-directional sets the lowest-index rows holding +1 in the
    target coordinate to -1 there, a worst-case one-sided push.
    """
    if spec.stage != "post":
        raise ValueError("corrupt_post needs a stage='post' spec")
    b = validate_bits(bits)
    rows, d = b.shape
    if n_total is None:
        n_total = rows
    m = min(corruption_budget(spec.eta, n_total), rows)
    out = b.copy()
    if m == 0:
        return out, np.empty(0, dtype=np.int64)
    if spec.pattern == "flip-random":
        mask = np.sort(choose_without_replacement(rows, m, rng))
        out[mask, :] *= -1.0
    else:  # flip-directional
        if not 0 <= coord < d:
            raise ValueError(f"target coordinate {coord} out of range for d={d}")
        holders = np.nonzero(b[:, coord] == 1.0)[0]
        mask = holders[:m].astype(np.int64)
        out[mask, coord] = -1.0
    return out, mask
