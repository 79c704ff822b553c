"""Render benchmark result CSVs as error plots.

Input contract: CSV with header
    scenario,sweep,estimator,mean_error,std_error,trials,seed
one curve per estimator, x = sweep, y = mean_error, shaded band of half-width
std_error / sqrt(trials). Rendering never touches the input file and a fixed
input yields a byte-identical image.
"""

from __future__ import annotations

import colorsys
import csv
import hashlib
import math
from dataclasses import dataclass
from itertools import zip_longest
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; keep headless hosts working

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["EXPECTED_COLUMNS", "PlotSpec", "load_rows", "render"]

EXPECTED_COLUMNS = ("scenario", "sweep", "estimator", "mean_error", "std_error", "trials", "seed")

# Styles are keyed by estimator name, not column order, so a series keeps its
# color and marker across every figure it appears in.
_SERIES_STYLE = {
    "sample-mean": ("#1f77b4", "o"),
    "trimmed-mean": ("#2ca02c", "s"),
    "partial-1d": ("#d62728", "^"),
    "partial-1d-robust": ("#9467bd", "v"),
    "partial-multi": ("#ff7f0e", "D"),
    "partial-multi-robust": ("#8c564b", "P"),
    "full-1d": ("#e377c2", "X"),
    "full-multi": ("#7f7f7f", "*"),
    "full-multi-robust": ("#bcbd22", "h"),
    "haar-full-multi": ("#17becf", "p"),
}

_FALLBACK_MARKERS = "osv^DP*Xhp"


def _style_for(name: str) -> tuple[str, str]:
    if name in _SERIES_STYLE:
        return _SERIES_STYLE[name]
    # digest, not hash(): stable across processes
    h = int(hashlib.md5(name.encode("utf-8")).hexdigest(), 16)
    r, g, b = colorsys.hsv_to_rgb((h % 997) / 997.0, 0.65, 0.80)
    color = f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}"
    return color, _FALLBACK_MARKERS[(h // 997) % len(_FALLBACK_MARKERS)]


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: which CSV, where the image goes, and axis mode."""

    csv_path: Path
    out_path: Path
    loglog: bool = False
    title: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "out_path", Path(self.out_path))


def _check_header(header: list[str], path: Path) -> None:
    if tuple(header) == EXPECTED_COLUMNS:
        return
    for i, (got, want) in enumerate(zip_longest(header, EXPECTED_COLUMNS)):
        if got == want:
            continue
        if want is None:
            raise ValueError(f"{path}: unexpected extra column {got!r} at position {i}")
        if got is None:
            raise ValueError(f"{path}: missing column {want!r}")
        raise ValueError(f"{path}: column {i} is {got!r}, expected {want!r}")


def _parse_record(rec: list[str], lineno: int, path: Path) -> dict:
    if len(rec) != len(EXPECTED_COLUMNS):
        raise ValueError(f"{path}:{lineno}: expected {len(EXPECTED_COLUMNS)} fields, got {len(rec)}")
    out = {"scenario": rec[0], "estimator": rec[2]}
    for col, raw, cast in (
        ("sweep", rec[1], float),
        ("mean_error", rec[3], float),
        ("std_error", rec[4], float),
        ("trials", rec[5], int),
        ("seed", rec[6], int),
    ):
        try:
            out[col] = cast(raw)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: column {col!r} has non-numeric value {raw!r}") from None
    if out["trials"] < 1:
        raise ValueError(f"{path}:{lineno}: column 'trials' must be >= 1, got {out['trials']}")
    if out["std_error"] < 0:
        raise ValueError(f"{path}:{lineno}: column 'std_error' must be >= 0, got {out['std_error']}")
    return out


def load_rows(csv_path: Path) -> list[dict]:
    """Parse and validate a results CSV; raises ValueError naming the first
    offending column or cell."""
    csv_path = Path(csv_path)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{csv_path}: empty file, expected header {','.join(EXPECTED_COLUMNS)}")
        _check_header(header, csv_path)
        rows = [_parse_record(rec, lineno, csv_path) for lineno, rec in enumerate(reader, start=2) if rec]
    if not rows:
        raise ValueError(f"{csv_path}: no data rows after the header")
    return rows


def render(spec: PlotSpec) -> dict[str, float]:
    """Draw one line per estimator with its error band and write the image.

    With loglog set, both axes are logarithmic and each series with at least
    two distinct sweep values gets a least-squares slope of log(mean_error)
    against log(sweep), annotated in the legend, printed to stdout, and
    returned as {estimator: slope}. Nothing is written when the CSV fails
    validation.
    """
    rows = load_rows(spec.csv_path)
    series: dict[str, list[dict]] = {}
    for r in rows:
        series.setdefault(r["estimator"], []).append(r)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    slopes: dict[str, float] = {}
    try:
        for name, recs in series.items():
            recs = sorted(recs, key=lambda r: r["sweep"])
            x = np.array([r["sweep"] for r in recs])
            y = np.array([r["mean_error"] for r in recs])
            band = np.array([r["std_error"] / math.sqrt(r["trials"]) for r in recs])
            label = name
            if spec.loglog:
                if np.any(x <= 0) or np.any(y <= 0):
                    raise ValueError(
                        f"{spec.csv_path}: series {name!r} has non-positive values; log-log needs positive data"
                    )
                if np.unique(x).size >= 2:
                    slopes[name] = float(np.polyfit(np.log(x), np.log(y), 1)[0])
                    label = f"{name} (slope {slopes[name]:.3f})"
            color, marker = _style_for(name)
            ax.plot(x, y, color=color, marker=marker, markersize=4, label=label)
            ax.fill_between(x, y - band, y + band, color=color, alpha=0.2, linewidth=0)
        if spec.loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("sweep")
        ax.set_ylabel("mean error")
        ax.set_title(spec.title if spec.title is not None else rows[0]["scenario"])
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()

        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        # vector backends embed timestamps by default; drop them so reruns
        # produce identical bytes
        save_kwargs = {}
        suffix = spec.out_path.suffix.lower()
        if suffix == ".svg":
            save_kwargs["metadata"] = {"Date": None}
        elif suffix == ".pdf":
            save_kwargs["metadata"] = {"CreationDate": None}
        with matplotlib.rc_context({"svg.hashsalt": "bitmean-figures"}):
            fig.savefig(spec.out_path, **save_kwargs)
    finally:
        plt.close(fig)
    for name, slope in slopes.items():
        print(f"{rows[0]['scenario']} {name} loglog slope: {slope!r}")
    return slopes
