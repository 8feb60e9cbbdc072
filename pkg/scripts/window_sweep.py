#!/usr/bin/env python3
"""
Run the end-to-end pipeline for several (window, stride) pairs.

Stride is window minus overlap; the default grid has overlaps of 3, 6, 9
and 1 hours.

Example:
  python scripts/window_sweep.py --config config/run.yaml --grid 6:3,12:6 --output runs/sweep
"""

import argparse
from pathlib import Path
import sys
from typing import List, Tuple

# Ensure the package root is importable when running from the project directory.
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from clinproj.errors import ClinProjError
from clinproj.logging_config import setup_logging
from clinproj.settings import load_config
from clinproj.workflow import PipelineRunner

DEFAULT_GRID = "6:3,12:6,12:3,3:2"


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Sweep window length and stride.")
    parser.add_argument("--config", "-c", default=None, help="Path to run config YAML")
    parser.add_argument(
        "--grid",
        default=DEFAULT_GRID,
        help=f"Comma-separated window:stride pairs (default: {DEFAULT_GRID})",
    )
    parser.add_argument("--input", "-i", default=None, help="PSV directory (synthesized when omitted)")
    parser.add_argument("--output", "-o", default="runs/sweep", help="Parent directory for per-pair runs")
    parser.add_argument("--iterations", type=int, default=None, help="Repeated splits per pair")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    return parser.parse_args()


def parse_grid(value: str) -> List[Tuple[int, int]]:
    pairs = []
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            window, stride = (int(part) for part in item.split(":"))
        except ValueError:
            raise ValueError(f"Invalid pair: {item}. Use window:stride")
        if not window > stride > 0:
            raise ValueError(f"Invalid pair: {item}. Need window > stride > 0")
        pairs.append((window, stride))
    if not pairs:
        raise ValueError("Empty grid")
    return pairs


def main() -> int:
    args = parse_args()
    setup_logging("WARNING")

    try:
        grid = parse_grid(args.grid)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 1

    base = load_config(args.config)
    shared_input = args.input or str(Path(args.output) / "psv")
    if args.input is None:
        PipelineRunner(base.with_overrides(seed=args.seed)).synthesize(Path(shared_input), corrupt_records=True)
    failures = 0
    print(f"{'window':>6} {'stride':>6} {'windows':>8} {'sens':>7} {'spec':>7} {'prec':>7} {'f':>7} {'auroc':>7}")

    for window, stride in grid:
        config = base.with_overrides(
            window=window,
            stride=stride,
            seed=args.seed,
            iterations=args.iterations,
            input=shared_input,
            output=str(Path(args.output) / f"w{window}_s{stride}"),
        )
        try:
            report = PipelineRunner(config).run_e2e(Path(shared_input))
        except (ClinProjError, ValueError) as e:
            print(f"{window:>6} {stride:>6}  ERROR: {e}")
            failures += 1
            continue

        summary = report.summaries["with_trust/test"].mean
        print(
            f"{window:>6} {stride:>6} {report.projection['windows']:>8} "
            f"{summary['sensitivity']:7.3f} {summary['specificity']:7.3f} "
            f"{summary['precision']:7.3f} {summary['f_score']:7.3f} {summary.get('auroc', float('nan')):7.3f}"
        )

    print(f"Done. Configurations run: {len(grid) - failures}, failed: {failures}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
