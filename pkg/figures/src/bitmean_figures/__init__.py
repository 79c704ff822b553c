"""Plotting companion for the bitmean experiment harness.

Consumes only the harness CSV schema (scenario,sweep,estimator,mean_error,
std_error,trials,seed); it does not import the estimation library.
"""

from importlib import metadata

try:
    __version__ = metadata.version("bitmean-figures")
except metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .plots import EXPECTED_COLUMNS, PlotSpec, load_rows, render

__all__ = ["EXPECTED_COLUMNS", "PlotSpec", "load_rows", "render", "__version__"]
