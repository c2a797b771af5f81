"""Cartesian-product sweep runner.

A grid file is a config file plus a ``[grid]`` section whose keys map to
comma-separated value lists.  Every combination becomes one cell: a
subdirectory holding its own materialized config.ini plus the usual run
outputs.  ``seed`` may appear in the grid like any parameter; cells
without one run at seed 0.
"""
from __future__ import annotations

import configparser
import itertools
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .config import ConfigError, SUITES, build_config, parse_params
from .suites import execute_run


@dataclass(frozen=True)
class SweepCell:
    name: str
    suite: str
    raw_params: dict[str, str]
    seed: int
    output_dir: str


def read_grid_file(path: str) -> tuple[str, str, dict[str, str], dict[str, list[str]]]:
    """Parse a grid file into (suite, out root, base params, grid lists)."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle, source=path)
    except FileNotFoundError as exc:
        raise ConfigError(f"grid file not found: {path}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed grid file {path}: {exc}") from exc
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")
    experiment = dict(parser["experiment"])
    suite = experiment.pop("suite", None)
    if suite is None:
        raise ConfigError(f"{path}: [experiment] must set 'suite'")
    suite = suite.strip().lower()
    if suite not in SUITES:
        raise ConfigError(f"{path}: unknown suite {suite!r} (expected one of {', '.join(SUITES)})")
    out_root = experiment.pop("out", ".").strip()
    if experiment:
        extras = ", ".join(sorted(experiment))
        raise ConfigError(f"{path}: unknown keys in [experiment]: {extras}")
    for section in parser.sections():
        if section not in ("experiment", "grid", suite):
            raise ConfigError(f"{path}: unexpected section [{section}] for suite {suite}")
    base = dict(parser[suite]) if suite in parser else {}
    grid: dict[str, list[str]] = {}
    if "grid" in parser:
        for key, text in parser["grid"].items():
            values = [part.strip() for part in text.split(",") if part.strip()]
            if not values:
                raise ConfigError(f"{path}: grid key {key!r} has no values")
            grid[key] = values
    return suite, out_root, base, grid


def _cell_name(assignment: dict[str, str]) -> str:
    if not assignment:
        return "cell__base"
    parts = [f"{key}={value}" for key, value in sorted(assignment.items())]
    return "cell__" + re.sub(r"[^A-Za-z0-9_.=+-]", "-", "__".join(parts))


def expand_cells(path: str, out_root: str | None = None) -> list[SweepCell]:
    """Enumerate and fully validate every cell of a grid file.

    Validation happens before any cell runs, so a single out-of-range grid
    value fails the whole sweep upfront.
    """
    suite, grid_out, base, grid = read_grid_file(path)
    root = out_root if out_root is not None else grid_out
    for key in grid:
        if key != "seed" and key not in base and key not in _known_params(suite):
            raise ConfigError(f"{path}: grid key {key!r} is not a {suite} parameter")
    keys = sorted(grid)
    cells = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        assignment = dict(zip(keys, combo))
        seed_text = assignment.pop("seed", "0")
        try:
            seed = int(seed_text, 10)
        except ValueError as exc:
            raise ConfigError(f"{path}: grid seed {seed_text!r} is not an integer") from exc
        raw = dict(base)
        raw.update(assignment)
        named = dict(zip(keys, combo))
        name = _cell_name(named)
        cell_dir = os.path.join(root, name)
        # raises ConfigError on any bad value
        build_config(suite, raw, seed, cell_dir)
        cells.append(SweepCell(name, suite, raw, seed, cell_dir))
    return cells


def _known_params(suite: str) -> set[str]:
    return set(parse_params(suite, {}).keys())


def materialize_config(cell: SweepCell) -> str:
    lines = ["[experiment]", f"suite = {cell.suite}", "", f"[{cell.suite}]"]
    for key in sorted(cell.raw_params):
        lines.append(f"{key} = {cell.raw_params[key]}")
    return "\n".join(lines) + "\n"


def run_cell(cell: SweepCell) -> list[str]:
    os.makedirs(cell.output_dir, exist_ok=True)
    config_path = os.path.join(cell.output_dir, "config.ini")
    with open(config_path, "w", encoding="utf-8", newline="") as handle:
        handle.write(materialize_config(cell))
    config = build_config(cell.suite, cell.raw_params, cell.seed, cell.output_dir)
    return [config_path] + execute_run(config)


def run_sweep(path: str, jobs: int, out_root: str | None = None) -> list[tuple[str, str]]:
    """Run every cell; returns (cell name, status) pairs in cell order.

    Cells own disjoint directories, so workers share no mutable state.
    Failures do not stop other cells; if any cell failed, a RuntimeError
    summarizing them is raised at the end.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    cells = expand_cells(path, out_root)
    statuses: list[tuple[str, str]] = []
    if jobs == 1:
        for cell in cells:
            statuses.append((cell.name, _attempt(cell)))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for cell, status in zip(cells, pool.map(_attempt, cells)):
                statuses.append((cell.name, status))
    failures = [name for name, status in statuses if status != "ok"]
    if failures:
        raise RuntimeError(f"{len(failures)} sweep cell(s) failed: {', '.join(failures)}")
    return statuses


def _attempt(cell: SweepCell) -> str:
    try:
        run_cell(cell)
        return "ok"
    except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
        return f"error: {exc}"
