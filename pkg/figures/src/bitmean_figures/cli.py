"""Command line entry point.

    bitmean-figures render --csv fig1.csv --out fig1.png [--loglog] [--title T]

reads one results CSV and writes one image; the format follows the output
extension (png, svg, pdf, ...).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import PlotSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitmean-figures", description="render benchmark result CSVs as error plots")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one CSV to an image")
    rend.add_argument("--csv", required=True, type=Path, help="results CSV path")
    rend.add_argument("--out", required=True, type=Path, help="output image path; extension picks the format")
    rend.add_argument("--loglog", action="store_true", help="log-log axes with per-series slope annotations")
    rend.add_argument("--title", default=None, help="plot title (default: the scenario name from the CSV)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PlotSpec(csv_path=args.csv, out_path=args.out, loglog=args.loglog, title=args.title)
    try:
        render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
