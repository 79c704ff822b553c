"""Command line entry point.

    bitmean run --scenario fig1 --trials 100 --seed 7 --out fig1.csv

writes fig1.csv plus fig1.manifest.json next to it. --scenario custom takes
a JSON payload via --config; see the README for the payload shape.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .harness import SCENARIOS, run, scenario_config, write_outputs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitmean", description="one-bit mean estimation experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a benchmark scenario and write CSV + manifest")
    runp.add_argument("--scenario", required=True, help=f"one of {', '.join(SCENARIOS)}, or 'custom'")
    runp.add_argument("--trials", type=int, default=100, help="trials per sweep point (default 100)")
    runp.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    runp.add_argument("--out", required=True, type=Path, help="output CSV path")
    runp.add_argument("--config", type=Path, default=None, help="JSON payload for --scenario custom")
    runp.add_argument("--threads", type=int, default=1, help="worker processes (default 1; output is identical)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        custom = None
        if args.config is not None:
            try:
                custom = json.loads(args.config.read_text(encoding="utf-8"))
            except OSError as exc:
                raise ValueError(f"cannot read --config {args.config}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ValueError(f"--config {args.config} is not valid JSON: {exc}") from exc
        cfg = scenario_config(
            args.scenario, trials=args.trials, seed=args.seed, custom=custom, threads=args.threads
        )
        start = time.perf_counter()
        rows = run(cfg)
        wall = time.perf_counter() - start
        csv_path, manifest_path = write_outputs(cfg, rows, args.out, wall_clock=wall)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(rows)} rows to {csv_path} (manifest: {manifest_path}, {wall:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
