"""Mean estimation from one-bit dithered measurements.

Library layout: core (truncation, dither identity, seeded streams),
quantiles (order-statistic rules and held-out splits), quantizer (sign
quantizers), estimators (full/partial pipelines and baselines), robust_agg
(row aggregators), adversary (corruption patterns), samplers (data laws),
harness (benchmark sweeps, CSV + manifest output).
"""

from importlib import metadata

try:
    __version__ = metadata.version("bitmean")
except metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .core import Interval, SeededRng, expected_dither_output, make_rng, truncate, uniform_dither
from .quantiles import QuantileSplit, empirical_quantile, population_quantile, quantile_split
from .quantizer import as_dither_levels, quantize_full_1d, quantize_full_multi, quantize_partial
from .robust_agg import AGGREGATOR_IDS, aggregate, geometric_median
from .adversary import CorruptionSpec, corrupt_post, corrupt_pre
from .samplers import (
    CovarianceSpec,
    DistributionSpec,
    choose_without_replacement,
    covariance_matrix,
    haar_orthogonal,
    low_trace_cov,
    sample,
)
from .estimators import (
    EstimatorConfig,
    TrialReport,
    baseline_sample_mean,
    baseline_trimmed_mean,
    estimate_from_bits,
    full_1d,
    full_multi,
    full_multi_robust,
    haar_rotate_pipeline,
    partial_1d,
    partial_1d_robust,
    partial_bits,
    partial_multi,
    partial_multi_robust,
)
from .harness import ExperimentConfig, ResultRow, loglog_slope, run, scenario_config, write_outputs

__all__ = [
    "__version__",
    "Interval",
    "SeededRng",
    "expected_dither_output",
    "make_rng",
    "truncate",
    "uniform_dither",
    "QuantileSplit",
    "empirical_quantile",
    "population_quantile",
    "quantile_split",
    "as_dither_levels",
    "quantize_full_1d",
    "quantize_full_multi",
    "quantize_partial",
    "AGGREGATOR_IDS",
    "aggregate",
    "geometric_median",
    "CorruptionSpec",
    "corrupt_post",
    "corrupt_pre",
    "CovarianceSpec",
    "DistributionSpec",
    "choose_without_replacement",
    "covariance_matrix",
    "haar_orthogonal",
    "low_trace_cov",
    "sample",
    "EstimatorConfig",
    "TrialReport",
    "baseline_sample_mean",
    "baseline_trimmed_mean",
    "estimate_from_bits",
    "full_1d",
    "full_multi",
    "full_multi_robust",
    "haar_rotate_pipeline",
    "partial_1d",
    "partial_1d_robust",
    "partial_bits",
    "partial_multi",
    "partial_multi_robust",
    "ExperimentConfig",
    "ResultRow",
    "loglog_slope",
    "run",
    "scenario_config",
    "write_outputs",
]
