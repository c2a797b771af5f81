"""Command-line entry point: run, report, and sweep subcommands.

Exit codes: 0 on success, 2 for configuration problems (bad flags, bad
config files, schema mismatches), 3 for runtime failures (I/O errors,
failed sweep cells, unexpected exceptions).
"""
from __future__ import annotations

import argparse
import glob
import os
import sys

from .config import ConfigError
from .report import MODES, aggregate, bar_files, load_rows, render_report
from .suites import execute_run
from .sweep import run_sweep
from .config import load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enslab",
        description="Run ensemble-agent experiment suites and aggregate their results.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment suite")
    run.add_argument("--config", required=True, help="experiment config file")
    run.add_argument("--seed", required=True, type=int, help="64-bit unsigned seed")
    run.add_argument("--out", required=True, help="output directory")

    report = commands.add_parser("report", help="aggregate results.csv files across seeds")
    report.add_argument("--in", dest="inputs", required=True, help="glob matching results.csv files")
    report.add_argument("--mode", choices=MODES, default="per-setting", help="aggregation mode")
    report.add_argument("--out", default=None, help="optional directory for summary files")

    sweep = commands.add_parser("sweep", help="run every cell of a parameter grid")
    sweep.add_argument("--grid", required=True, help="grid file")
    sweep.add_argument("--jobs", type=int, default=1, help="worker count")
    sweep.add_argument("--out", default=None, help="override the grid file's output root")
    return parser


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.seed, args.out)
    for path in execute_run(config):
        print(path)
    return 0


def _report(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.inputs, recursive=True))
    rows = aggregate(load_rows(paths), args.mode)
    text = render_report(rows)
    sys.stdout.write(text)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        summary_path = os.path.join(args.out, "summary.csv")
        with open(summary_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        if args.mode == "global":
            for name, content in bar_files(rows).items():
                with open(os.path.join(args.out, name), "w", encoding="utf-8", newline="") as handle:
                    handle.write(content)
    return 0


def _sweep(args: argparse.Namespace) -> int:
    for name, status in run_sweep(args.grid, args.jobs, args.out):
        print(f"{name}: {status}")
    return 0


_HANDLERS = {"run": _run, "report": _report, "sweep": _sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
