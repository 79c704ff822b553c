"""Experiment harness: named benchmark sweeps over (n, d, eta), trial
averaging, and delimited output with a JSON run manifest.

Output contract: CSV with header
    scenario,sweep,estimator,mean_error,std_error,trials,seed
one row per (sweep point, estimator series), mean/std taken over trials.
Errors are absolute for d = 1 and l2 for d > 1. Byte-identical reruns for a
fixed seed, serial or parallel.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .adversary import POST_PATTERNS, PRE_PATTERNS, CorruptionSpec, corrupt_post, corrupt_pre
from .core import make_rng
from .estimators import (
    EstimatorConfig,
    TrialReport,
    baseline_sample_mean,
    baseline_trimmed_mean,
    estimate_from_bits,
    full_1d,
    full_bits_used,
    full_multi,
    full_multi_robust,
    haar_rotate_pipeline,
    partial_bits,
    partial_bits_used,
    raw_bits_used,
)
from .quantizer import as_dither_levels, quantize_full_multi
from .samplers import CovarianceSpec, DistributionSpec, covariance_matrix, low_trace_cov, sample

__all__ = [
    "CSV_HEADER",
    "XI_GRID",
    "SCENARIOS",
    "ESTIMATOR_IDS",
    "SweepPoint",
    "Series",
    "CorruptionPlan",
    "ExperimentConfig",
    "ResultRow",
    "scenario_config",
    "run",
    "rows_to_csv_text",
    "write_outputs",
    "loglog_slope",
]

CSV_HEADER = "scenario,sweep,estimator,mean_error,std_error,trials,seed"

# Trim fractions scanned by the trimmed-mean baseline; the harness records
# the best candidate per trial, a strong baseline to compare against.
XI_GRID = (0.1, 0.2, 0.3, 0.4, 0.5)

_DEFAULT_AGGREGATOR = "geometric-median"


# --- configuration types ----------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    """One resolved grid point: data law, sizes, and estimator parameters."""

    sweep: float
    n: int
    d: int
    mean: np.ndarray
    cov: CovarianceSpec
    n0: int | None = None
    epsilon: float | None = None
    eta: float = 0.0
    lam: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=np.float64)))
        if self.mean.size != self.d:
            raise ValueError(f"mean dimension {self.mean.size} != d={self.d}")
        if self.cov.d != self.d:
            raise ValueError(f"covariance dimension {self.cov.d} != d={self.d}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError(f"eta must be in [0, 1/2), got {self.eta}")


@dataclass(frozen=True)
class Series:
    """One estimator curve. eta_override pins the corruption level for this
    curve (used when several corruption levels share one data draw)."""

    name: str
    estimator: str
    eta_override: float | None = None


@dataclass(frozen=True)
class CorruptionPlan:
    stage: str
    pattern: str

    def __post_init__(self) -> None:
        # reuse the spec validation; eta comes per point/series later
        CorruptionSpec(stage=self.stage, eta=0.0, pattern=self.pattern)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    trials: int
    seed: int
    points: tuple[SweepPoint, ...]
    series: tuple[Series, ...]
    corruption: CorruptionPlan | None = None
    aggregator: str | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if not self.points:
            raise ValueError("config needs at least one sweep point")
        if not self.series:
            raise ValueError("config needs at least one estimator series")
        names = [s.name for s in self.series]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate series names: {names}")
        for s in self.series:
            spec = _estimator_def(s.estimator)
            for p in self.points:
                _check_point_for(spec, s.estimator, p)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    sweep: float
    estimator: str
    mean_error: float
    std_error: float
    trials: int
    seed: int


# --- estimator registry -----------------------------------------------------


def _no_post(name: str, post) -> None:
    if post is not None:
        raise ValueError(f"estimator {name!r} produces no bits; post-stage corruption does not apply")


def _run_sample_mean(x, point, eta, rng, aggregator, post):
    _no_post("sample-mean", post)
    return [baseline_sample_mean(x)]

def _run_trimmed_mean(x, point, eta, rng, aggregator, post):
    _no_post("trimmed-mean", post)
    return [np.atleast_1d(baseline_trimmed_mean(x, point.epsilon, xi)) for xi in XI_GRID]

def _partial_estimate(x, point, eta, rng, post, random_holdout, aggregator_name):
    cfg = EstimatorConfig(n0=point.n0, epsilon=point.epsilon)
    split, bits, _ = partial_bits(x, cfg, rng, random_holdout=random_holdout)
    if post is not None:
        spec = CorruptionSpec(stage="post", eta=eta, pattern=post.pattern)
        bits, _ = corrupt_post(bits, spec, rng, n_total=point.n)
    return estimate_from_bits(bits=bits, split=split, aggregator=aggregator_name, eta_hint=eta)

def _run_partial_1d(x, point, eta, rng, aggregator, post):
    return [_partial_estimate(x, point, eta, rng, post, False, "empirical-mean")]

def _run_partial_1d_robust(x, point, eta, rng, aggregator, post):
    return [_partial_estimate(x, point, eta, rng, post, True, "empirical-mean")]

def _run_partial_multi(x, point, eta, rng, aggregator, post):
    return [_partial_estimate(x, point, eta, rng, post, False, "empirical-mean")]

def _run_partial_multi_robust(x, point, eta, rng, aggregator, post):
    return [_partial_estimate(x, point, eta, rng, post, True, aggregator or _DEFAULT_AGGREGATOR)]

def _full_bits(x, point, eta, rng, post):
    lam = as_dither_levels(point.lam, point.d)
    bits = quantize_full_multi(x, lam, rng)
    if post is not None:
        spec = CorruptionSpec(stage="post", eta=eta, pattern=post.pattern)
        bits, _ = corrupt_post(bits, spec, rng, n_total=point.n)
    return lam, bits

def _run_full_1d(x, point, eta, rng, aggregator, post):
    lam, bits = _full_bits(x, point, eta, rng, post)
    return [np.atleast_1d(full_1d(bits, float(lam[0])))]

def _run_full_multi(x, point, eta, rng, aggregator, post):
    lam, bits = _full_bits(x, point, eta, rng, post)
    return [full_multi(bits, lam)]

def _run_full_multi_robust(x, point, eta, rng, aggregator, post):
    lam, bits = _full_bits(x, point, eta, rng, post)
    return [full_multi_robust(bits, lam, aggregator or _DEFAULT_AGGREGATOR, eta_hint=eta)]

def _run_haar_full_multi(x, point, eta, rng, aggregator, post):
    _no_post("haar-full-multi", post)  # bits are internal to the rotation pipeline
    cfg = EstimatorConfig(levels=point.lam)
    return [haar_rotate_pipeline(x, cfg, rng)]


@dataclass(frozen=True)
class EstimatorDef:
    run: Callable
    kind: str  # "raw" | "partial" | "full"
    univariate: bool = False
    needs_split: bool = False
    needs_lam: bool = False


ESTIMATORS = {
    "sample-mean": EstimatorDef(_run_sample_mean, "raw"),
    "trimmed-mean": EstimatorDef(_run_trimmed_mean, "raw", univariate=True, needs_split=True),
    "partial-1d": EstimatorDef(_run_partial_1d, "partial", univariate=True, needs_split=True),
    "partial-1d-robust": EstimatorDef(_run_partial_1d_robust, "partial", univariate=True, needs_split=True),
    "partial-multi": EstimatorDef(_run_partial_multi, "partial", needs_split=True),
    "partial-multi-robust": EstimatorDef(_run_partial_multi_robust, "partial", needs_split=True),
    "full-1d": EstimatorDef(_run_full_1d, "full", univariate=True, needs_lam=True),
    "full-multi": EstimatorDef(_run_full_multi, "full", needs_lam=True),
    "full-multi-robust": EstimatorDef(_run_full_multi_robust, "full", needs_lam=True),
    "haar-full-multi": EstimatorDef(_run_haar_full_multi, "full", needs_lam=True),
}

ESTIMATOR_IDS = tuple(ESTIMATORS)


def _estimator_def(name: str) -> EstimatorDef:
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise ValueError(f"unknown estimator {name!r}; expected one of {ESTIMATOR_IDS}") from None


def _check_point_for(spec: EstimatorDef, name: str, p: SweepPoint) -> None:
    if spec.univariate and p.d != 1:
        raise ValueError(f"estimator {name!r} is univariate but sweep point n={p.n} has d={p.d}")
    if spec.needs_split and (p.n0 is None or p.epsilon is None):
        raise ValueError(f"estimator {name!r} needs n0 and epsilon at every sweep point")
    if spec.needs_lam and p.lam is None:
        raise ValueError(f"estimator {name!r} needs a dither level lam at every sweep point")


def _bits_for(kind: str, p: SweepPoint) -> int:
    if kind == "partial":
        return partial_bits_used(p.n, p.n0, p.d)
    if kind == "full":
        return full_bits_used(p.n, p.d)
    return raw_bits_used(p.n, p.d)


# --- scenarios --------------------------------------------------------------


def _fig1() -> tuple[tuple[SweepPoint, ...], tuple[Series, ...], CorruptionPlan | None]:
    points = tuple(
        SweepPoint(
            sweep=n, n=n, d=1, mean=np.array([100.0]), cov=CovarianceSpec.identity(1),
            n0=math.ceil(math.sqrt(n)), epsilon=math.sqrt(2.0 / n),
        )
        for n in (50, 100, 200, 300, 400, 500)
    )
    series = (Series("partial-1d", "partial-1d"), Series("sample-mean", "sample-mean"))
    return points, series, None


def _multi_points(ns, d_of, cov_of) -> tuple[SweepPoint, ...]:
    out = []
    for n in ns:
        d = d_of(n)
        out.append(
            SweepPoint(
                sweep=n, n=n, d=d, mean=np.full(d, 100.0), cov=cov_of(d),
                n0=math.ceil(2.0 * math.sqrt(n)), epsilon=3.0 / math.sqrt(n),
            )
        )
    return tuple(out)


def _fig2():
    points = _multi_points((1200, 1500, 1800, 2100, 2400), lambda n: 30, lambda d: CovarianceSpec.toeplitz(d, 0.5))
    series = (Series("partial-multi", "partial-multi"), Series("sample-mean", "sample-mean"))
    return points, series, None


def _fig3():
    points = _multi_points((200, 400, 600, 800, 1000), lambda n: n // 10, low_trace_cov)
    series = (Series("partial-multi", "partial-multi"), Series("sample-mean", "sample-mean"))
    return points, series, None


def _fig4():
    n = 1000
    points = tuple(
        SweepPoint(
            sweep=eta, n=n, d=1, mean=np.array([100.0]), cov=CovarianceSpec.identity(1),
            n0=math.ceil(math.sqrt(n)), epsilon=eta + 1.0 / math.sqrt(n), eta=eta,
        )
        for eta in (round(0.005 * k, 3) for k in range(1, 41))
    )
    series = (Series("partial-1d-robust", "partial-1d-robust"), Series("trimmed-mean", "trimmed-mean"))
    return points, series, CorruptionPlan("pre", "reflect-largest")


def _fig5():
    points = tuple(
        SweepPoint(
            sweep=d, n=100 * d, d=d, mean=np.zeros(d), cov=CovarianceSpec.identity(d), lam=2.0,
        )
        for d in range(10, 101, 10)
    )
    series = tuple(
        Series(f"full-multi(eta={eta:g})", "full-multi", eta_override=eta) for eta in (0.0, 0.05, 0.1)
    )
    return points, series, CorruptionPlan("pre", "shift-all-ones")


SCENARIOS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def _custom_cov(raw, d: int) -> CovarianceSpec:
    if raw is None or raw == "identity":
        return CovarianceSpec.identity(d)
    if isinstance(raw, str):
        if raw == "low-trace":
            return low_trace_cov(d)
        raise ValueError(f"unknown covariance {raw!r}; expected 'identity', 'low-trace', or a kind object")
    kind = raw.get("kind")
    if kind == "identity":
        return CovarianceSpec.identity(d)
    if kind == "low-trace":
        return low_trace_cov(d)
    if kind == "toeplitz":
        if "rho" not in raw:
            raise ValueError("toeplitz covariance needs 'rho'")
        return CovarianceSpec.toeplitz(d, float(raw["rho"]))
    raise ValueError(f"unknown covariance kind {kind!r}")


def _custom_scenario(payload: dict):
    if not isinstance(payload, dict):
        raise ValueError("custom config must be a JSON object")
    estimators = payload.get("estimators")
    if not estimators:
        raise ValueError("custom config needs a nonempty 'estimators' list")
    raw_points = payload.get("points")
    if not raw_points:
        raise ValueError("custom config needs a nonempty 'points' list")
    default_lam = payload.get("lam")
    points = []
    for i, rp in enumerate(raw_points):
        if "n" not in rp:
            raise ValueError(f"points[{i}] is missing 'n'")
        n = int(rp["n"])
        d = int(rp.get("d", 1))
        mean_raw = rp.get("mean", 0.0)
        mean = np.full(d, float(mean_raw)) if np.isscalar(mean_raw) else np.asarray(mean_raw, dtype=np.float64)
        points.append(
            SweepPoint(
                sweep=float(rp.get("sweep", n)),
                n=n,
                d=d,
                mean=mean,
                cov=_custom_cov(rp.get("cov"), d),
                n0=int(rp["n0"]) if "n0" in rp else math.ceil(math.sqrt(n)),
                epsilon=float(rp["epsilon"]) if "epsilon" in rp else math.sqrt(2.0 / n),
                eta=float(rp.get("eta", 0.0)),
                lam=float(rp["lam"]) if "lam" in rp else (float(default_lam) if default_lam is not None else None),
            )
        )
    corruption = None
    if payload.get("corruption") is not None:
        c = payload["corruption"]
        if "stage" not in c or "pattern" not in c:
            raise ValueError("corruption needs 'stage' and 'pattern'")
        corruption = CorruptionPlan(stage=c["stage"], pattern=c["pattern"])
    series = tuple(Series(name, name) for name in estimators)
    return payload.get("name", "custom"), tuple(points), series, corruption, payload.get("aggregator")


def scenario_config(
    scenario: str,
    trials: int = 100,
    seed: int = 0,
    custom: dict | None = None,
    threads: int = 1,
) -> ExperimentConfig:
    """Resolve a scenario name (fig1..fig5 or 'custom' plus a payload dict)."""
    if scenario == "custom":
        if custom is None:
            raise ValueError("scenario 'custom' needs a config payload (--config file)")
        name, points, series, corruption, aggregator = _custom_scenario(custom)
        return ExperimentConfig(
            scenario=name, trials=trials, seed=seed, points=points, series=series,
            corruption=corruption, aggregator=aggregator, threads=threads,
        )
    try:
        builder = SCENARIOS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {tuple(SCENARIOS) + ('custom',)}") from None
    points, series, corruption = builder()
    return ExperimentConfig(
        scenario=scenario, trials=trials, seed=seed, points=points, series=series,
        corruption=corruption, threads=threads,
    )


# --- runner -----------------------------------------------------------------
#
# Stream layout under the root seed (spawn_key paths, never reused):
#   (g, 0)               covariance realization for sweep point g
#   (g, 1, t, 0)         data draw for trial t
#   (g, 1, t, 1)         corruption shared by all series
#   (g, 1, t, 2, k, 0)   per-series corruption (when levels differ by series)
#   (g, 1, t, 2, k, 1)   estimator randomness for series k


def _materialized_covs(cfg: ExperimentConfig) -> tuple[np.ndarray, ...]:
    return tuple(covariance_matrix(p.cov, make_rng(cfg.seed, g, 0)) for g, p in enumerate(cfg.points))


def _trial_errors(cfg: ExperimentConfig, covs, g: int, t: int) -> list[float]:
    point = cfg.points[g]
    dist = DistributionSpec.gaussian(point.mean, covs[g])
    x = sample(dist, point.n, make_rng(cfg.seed, g, 1, t, 0))
    plan = cfg.corruption
    shared = plan is not None and plan.stage == "pre" and all(s.eta_override is None for s in cfg.series)
    x_shared = None
    if shared:
        spec = CorruptionSpec(stage="pre", eta=point.eta, pattern=plan.pattern)
        x_shared, _ = corrupt_pre(x, spec, point.mean, make_rng(cfg.seed, g, 1, t, 1))
    errors = []
    for k, s in enumerate(cfg.series):
        eta_k = point.eta if s.eta_override is None else s.eta_override
        post = None
        xk = x
        if plan is not None:
            if plan.stage == "pre":
                if shared:
                    xk = x_shared
                else:
                    spec = CorruptionSpec(stage="pre", eta=eta_k, pattern=plan.pattern)
                    xk, _ = corrupt_pre(x, spec, point.mean, make_rng(cfg.seed, g, 1, t, 2, k, 0))
            else:
                post = plan
        est = _estimator_def(s.estimator)
        rng = make_rng(cfg.seed, g, 1, t, 2, k, 1)
        candidates = est.run(xk, point, eta_k, rng, cfg.aggregator, post)
        bits = _bits_for(est.kind, point)
        reports = [TrialReport.make(c, point.mean, bits, cfg.seed) for c in candidates]
        errors.append(min(r.err_l2 for r in reports))
    return errors


_POOL_STATE: dict = {}


def _pool_init(cfg: ExperimentConfig, covs) -> None:
    _POOL_STATE["cfg"] = cfg
    _POOL_STATE["covs"] = covs


def _pool_task(gt: tuple[int, int]):
    g, t = gt
    return g, t, _trial_errors(_POOL_STATE["cfg"], _POOL_STATE["covs"], g, t)


def run(cfg: ExperimentConfig) -> list[ResultRow]:
    """Execute every (sweep point, trial, series) cell and aggregate rows.

    Each trial's RNG streams derive from (seed, point, trial), so results do
    not depend on scheduling; threads > 1 fans trials out to worker
    processes and reassembles in order.
    """
    covs = _materialized_covs(cfg)
    n_points = len(cfg.points)
    errors = np.empty((n_points, cfg.trials, len(cfg.series)))
    tasks = [(g, t) for g in range(n_points) for t in range(cfg.trials)]
    if cfg.threads > 1:
        chunk = max(1, len(tasks) // (4 * cfg.threads))
        with ProcessPoolExecutor(max_workers=cfg.threads, initializer=_pool_init, initargs=(cfg, covs)) as pool:
            for g, t, errs in pool.map(_pool_task, tasks, chunksize=chunk):
                errors[g, t, :] = errs
    else:
        for g, t in tasks:
            errors[g, t, :] = _trial_errors(cfg, covs, g, t)
    rows = []
    for g, point in enumerate(cfg.points):
        for k, s in enumerate(cfg.series):
            errs = errors[g, :, k]
            std = float(np.std(errs, ddof=1)) if cfg.trials > 1 else 0.0
            rows.append(
                ResultRow(
                    scenario=cfg.scenario,
                    sweep=float(point.sweep),
                    estimator=s.name,
                    mean_error=float(np.mean(errs)),
                    std_error=std,
                    trials=cfg.trials,
                    seed=cfg.seed,
                )
            )
    return rows


# --- output -----------------------------------------------------------------


def _fmt_sweep(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def rows_to_csv_text(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.scenario},{_fmt_sweep(r.sweep)},{r.estimator},{r.mean_error!r},{r.std_error!r},{r.trials},{r.seed}"
        )
    return "\n".join(lines) + "\n"


def _manifest(cfg: ExperimentConfig, wall_clock: float) -> dict:
    from . import __version__

    points = []
    for p in cfg.points:
        mean_vals = np.unique(p.mean)
        points.append(
            {
                "sweep": p.sweep,
                "n": p.n,
                "d": p.d,
                "n0": p.n0,
                "epsilon": p.epsilon,
                "eta": p.eta,
                "lam": p.lam,
                "mean": float(mean_vals[0]) if mean_vals.size == 1 else p.mean.tolist(),
                "cov": {"kind": p.cov.kind, "rho": p.cov.rho, "trace": p.cov.trace()},
            }
        )
    return {
        "scenario": cfg.scenario,
        "version": __version__,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "threads": cfg.threads,
        "series": [asdict(s) for s in cfg.series],
        "corruption": asdict(cfg.corruption) if cfg.corruption else None,
        "aggregator": cfg.aggregator,
        "points": points,
        "wall_clock_seconds": wall_clock,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def write_outputs(cfg: ExperimentConfig, rows, out_path, wall_clock: float = 0.0) -> tuple[Path, Path]:
    """Write the CSV and its sibling manifest; returns both paths."""
    csv_path = Path(out_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv_text(rows), encoding="utf-8")
    manifest_path = csv_path.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(_manifest(cfg, wall_clock), indent=2) + "\n", encoding="utf-8")
    return csv_path, manifest_path


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])
