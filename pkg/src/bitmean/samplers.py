"""Synthetic data: Gaussian families, a heavy-atom three-point law, structured
covariances, and Haar-random rotations.

Covariance kinds:
  identity        I_d
  toeplitz        rho^|i-j|
  haar-diagonal   O^T Diag(spectrum) O with O drawn Haar; trace is spectrum.sum()
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import validate_samples

__all__ = [
    "CovarianceSpec",
    "DistributionSpec",
    "covariance_matrix",
    "gaussian_factor",
    "haar_orthogonal",
    "low_trace_cov",
    "sample",
    "choose_without_replacement",
]

_COV_KINDS = ("identity", "toeplitz", "haar-diagonal")


@dataclass(frozen=True)
class CovarianceSpec:
    kind: str
    d: int
    rho: float | None = None
    spectrum: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in _COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}; expected one of {_COV_KINDS}")
        if self.d < 1:
            raise ValueError(f"covariance dimension must be >= 1, got {self.d}")
        if self.kind == "toeplitz":
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise ValueError("toeplitz covariance needs |rho| < 1")
        if self.kind == "haar-diagonal":
            if self.spectrum is None:
                raise ValueError("haar-diagonal covariance needs a spectrum")
            spec = np.asarray(self.spectrum, dtype=np.float64).ravel()
            if spec.size != self.d or np.any(spec < 0) or not np.isfinite(spec).all():
                raise ValueError("spectrum must be d nonnegative finite eigenvalues")
            object.__setattr__(self, "spectrum", spec)

    @classmethod
    def identity(cls, d: int) -> "CovarianceSpec":
        return cls(kind="identity", d=d)

    @classmethod
    def toeplitz(cls, d: int, rho: float) -> "CovarianceSpec":
        return cls(kind="toeplitz", d=d, rho=rho)

    @classmethod
    def haar_diagonal(cls, spectrum) -> "CovarianceSpec":
        spec = np.asarray(spectrum, dtype=np.float64).ravel()
        return cls(kind="haar-diagonal", d=spec.size, spectrum=spec)

    def trace(self) -> float:
        if self.kind == "haar-diagonal":
            return float(self.spectrum.sum())
        return float(self.d)


def low_trace_cov(d: int) -> CovarianceSpec:
    """Rotated diagonal with spectrum {1, 1/4, 1/9, ...}; trace stays below pi^2/6."""
    return CovarianceSpec.haar_diagonal(np.arange(1, d + 1, dtype=np.float64) ** -2.0)


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix.

    QR of a Gaussian matrix, with column signs fixed so R has a positive
    diagonal; that makes the factorization unique and the law exactly Haar.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diag(r) >= 0.0, 1.0, -1.0)
    return q * signs


def covariance_matrix(spec: CovarianceSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    if spec.kind == "identity":
        return np.eye(spec.d)
    if spec.kind == "toeplitz":
        idx = np.arange(spec.d)
        return spec.rho ** np.abs(np.subtract.outer(idx, idx)).astype(np.float64)
    # haar-diagonal: realization is random, so an rng is mandatory
    if rng is None:
        raise ValueError("haar-diagonal covariance needs an rng to draw the rotation")
    o = haar_orthogonal(spec.d, rng)
    mat = o.T @ (spec.spectrum[:, None] * o)
    return (mat + mat.T) / 2.0


def gaussian_factor(cov: np.ndarray) -> np.ndarray:
    """Factor F with F F^T = cov.

    Cholesky on the fast path; positive semidefinite inputs (zero matrix
    included) fall back to an eigendecomposition with eigenvalues clipped at
    zero, so degenerate directions contribute exactly nothing.
    """
    c = np.asarray(cov, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"covariance must be square, got shape {c.shape}")
    if not np.allclose(c, c.T, rtol=1e-10, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    try:
        return np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(c)
        floor = -1e-8 * max(float(w.max()), 1.0)
        if float(w.min()) < floor:
            raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {w.min():.3e})")
        return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling family: 'gaussian' (mean, cov) or 'three-point' (a, b, eps).

    The three-point law puts mass eps at b and (1 - eps) / 2 at each of
    +/-a, so its mean is eps * b and its (1 - eps)-quantile is b.
    """

    family: str
    mean: np.ndarray | None = None
    cov: object | None = None  # CovarianceSpec or realized (d, d) matrix
    a: float | None = None
    b: float | None = None
    eps: float | None = None

    @classmethod
    def gaussian(cls, mean, cov) -> "DistributionSpec":
        m = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        if m.ndim != 1:
            raise ValueError("gaussian mean must be a vector")
        if isinstance(cov, CovarianceSpec):
            if cov.d != m.size:
                raise ValueError(f"mean dim {m.size} != covariance dim {cov.d}")
        else:
            cov = np.asarray(cov, dtype=np.float64)
            if cov.shape != (m.size, m.size):
                raise ValueError(f"covariance shape {cov.shape} incompatible with mean dim {m.size}")
        return cls(family="gaussian", mean=m, cov=cov)

    @classmethod
    def three_point(cls, a: float, b: float, eps: float) -> "DistributionSpec":
        if not 0.0 < eps < 1.0:
            raise ValueError(f"three-point eps must be in (0, 1), got {eps}")
        if not 0.0 < a < b:
            raise ValueError(f"three-point law needs 0 < a < b, got a={a}, b={b}")
        return cls(family="three-point", a=float(a), b=float(b), eps=float(eps))

    @property
    def d(self) -> int:
        return 1 if self.family == "three-point" else self.mean.size

    def true_mean(self) -> np.ndarray:
        if self.family == "gaussian":
            return self.mean.copy()
        return np.array([self.eps * self.b])

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        if self.family != "three-point":
            raise ValueError("atoms are defined for discrete families only")
        points = np.array([-self.a, self.a, self.b])
        masses = np.array([(1.0 - self.eps) / 2.0, (1.0 - self.eps) / 2.0, self.eps])
        return points, masses

    def marginal(self, coord: int = 0) -> tuple[float, float]:
        """(mean, variance) of one coordinate; Gaussian families only."""
        if self.family != "gaussian":
            raise ValueError("marginal is defined for gaussian families")
        if not 0 <= coord < self.d:
            raise ValueError(f"coordinate {coord} out of range for d={self.d}")
        if isinstance(self.cov, CovarianceSpec):
            if self.cov.kind == "haar-diagonal":
                raise ValueError("materialize a haar-diagonal covariance before taking marginals")
            return float(self.mean[coord]), 1.0
        return float(self.mean[coord]), float(self.cov[coord, coord])


def sample(dist: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n rows. For haar-diagonal covariance specs the rotation is drawn
    from the same rng before the data, so one stream fixes the whole draw."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if dist.family == "three-point":
        points, masses = dist.atoms()
        return rng.choice(points, size=(n, 1), p=masses)
    cov = dist.cov
    if isinstance(cov, CovarianceSpec):
        cov = covariance_matrix(cov, rng)
    factor = gaussian_factor(cov)
    z = rng.standard_normal((n, dist.d))
    return dist.mean + z @ factor.T


def choose_without_replacement(n: int, n0: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform size-n0 subset of range(n), as an index array."""
    if not 0 <= n0 <= n:
        raise ValueError(f"need 0 <= n0 <= n, got n0={n0}, n={n}")
    return rng.choice(n, size=n0, replace=False).astype(np.int64)


def empirical_covariance(x) -> np.ndarray:
    """Plain biased empirical covariance, for sampler sanity checks."""
    arr = validate_samples(x)
    centered = arr - arr.mean(axis=0)
    return centered.T @ centered / arr.shape[0]
