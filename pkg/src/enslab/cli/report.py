"""Aggregation of results.csv files across seeds.

Two modes mirror the two tuning stories: ``per-setting`` keeps every
setting-descriptor column in the group key, ``global`` pools settings and
groups by (suite, agent, metric) only.  Aggregated rows carry the mean
across seeds and its standard error; paired one-sided sign-test rows are
emitted for every ordered agent pair whose rows cover identical
(setting, seed) keys.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..stats import mean_and_stderr, sign_test_pvalue
from .config import ConfigError
from .results import COLUMNS, format_cell, read_results

MODES = ("per-setting", "global")

_SETTING_COLUMNS = (
    "d",
    "train_size",
    "temperature",
    "flip_fraction",
    "noise_variance",
    "prior_variance",
    "n_actions",
    "horizon",
)


def load_rows(paths: Sequence[str]) -> list[dict[str, object]]:
    """Read and pool results files, rejecting duplicate measurements."""
    if not paths:
        raise ConfigError("no results files to report on")
    rows: list[dict[str, object]] = []
    seen: dict[tuple[str, ...], str] = {}
    for path in paths:
        for row in read_results(path):
            key = _cells(row, COLUMNS, drop=("value", "std_error"))
            if key in seen:
                raise ConfigError(
                    f"duplicate measurement in {path} (already seen in {seen[key]}): {key}"
                )
            seen[key] = path
            rows.append(row)
    return rows


def _cells(row: Mapping[str, object], names: Sequence[str], drop: Sequence[str] = ()) -> tuple[str, ...]:
    return tuple(format_cell(name, row[name]) for name in names if name not in drop)


@dataclass(frozen=True)
class _Group:
    suite: str
    setting: tuple[str, ...]
    agent: str
    metric: str


def aggregate(rows: Sequence[Mapping[str, object]], mode: str) -> list[dict[str, str]]:
    """Aggregate rows into output cell dictionaries (all values as strings)."""
    if mode not in MODES:
        raise ConfigError(f"unknown report mode {mode!r} (expected one of {', '.join(MODES)})")
    per_setting = mode == "per-setting"
    groups: dict[_Group, dict[tuple[str, ...], float]] = {}
    for row in rows:
        setting = _cells(row, _SETTING_COLUMNS) if per_setting else ("",) * len(_SETTING_COLUMNS)
        group = _Group(str(row["suite"]), setting, str(row["agent"]), str(row["metric"]))
        # pair key: what identifies a replicate within the group
        if per_setting:
            pair_key = (format_cell("seed", row["seed"]),)
        else:
            pair_key = _cells(row, _SETTING_COLUMNS) + (format_cell("seed", row["seed"]),)
        groups.setdefault(group, {})[pair_key] = float(row["value"])  # type: ignore[arg-type]

    out: list[dict[str, str]] = []
    for group in sorted(groups, key=lambda g: (g.suite, g.setting, g.metric, g.agent)):
        replicates = groups[group]
        values = [replicates[k] for k in sorted(replicates)]
        if all(v == values[0] for v in values):
            mean, std_error = values[0], 0.0
        else:
            mean, std_error = mean_and_stderr(values)
        out.append(_output_row(group, group.agent, group.metric, mean, std_error))

    # paired sign tests between agents that share a (suite, setting, metric)
    by_comparison: dict[tuple[str, tuple[str, ...], str], list[_Group]] = {}
    for group in groups:
        by_comparison.setdefault((group.suite, group.setting, group.metric), []).append(group)
    for comparison in sorted(by_comparison):
        members = sorted(by_comparison[comparison], key=lambda g: g.agent)
        for first in members:
            for second in members:
                if first.agent == second.agent:
                    continue
                a, b = groups[first], groups[second]
                if not a or set(a) != set(b):
                    continue
                keys = sorted(a)
                p_value = sign_test_pvalue([a[k] for k in keys], [b[k] for k in keys])
                out.append(
                    _output_row(
                        first,
                        first.agent,
                        f"{first.metric}_sign_below_{second.agent}",
                        p_value,
                        None,
                    )
                )
    return out


def _output_row(group: _Group, agent: str, metric: str, value: float, std_error: float | None) -> dict[str, str]:
    cells = {name: "" for name in COLUMNS}
    cells["suite"] = group.suite
    cells["agent"] = agent
    cells["metric"] = metric
    for name, cell in zip(_SETTING_COLUMNS, group.setting):
        cells[name] = cell
    cells["value"] = format_cell("value", value)
    cells["std_error"] = "" if std_error is None else format_cell("std_error", std_error)
    return cells


def render_report(out_rows: Sequence[Mapping[str, str]]) -> str:
    lines = [",".join(COLUMNS)]
    for row in out_rows:
        lines.append(",".join(row[name] for name in COLUMNS))
    return "\n".join(lines) + "\n"


def bar_files(out_rows: Sequence[Mapping[str, str]]) -> dict[str, str]:
    """Agent-versus-value bar data per (suite, metric), global mode only.

    Sign-test rows are skipped; each file has one agent\tvalue line per
    agent, sorted.
    """
    bars: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for row in out_rows:
        if "_sign_below_" in row["metric"]:
            continue
        bars.setdefault((row["suite"], row["metric"]), []).append((row["agent"], row["value"]))
    files = {}
    for (suite, metric), pairs in sorted(bars.items()):
        lines = [f"{agent}\t{value}" for agent, value in sorted(pairs)]
        files[f"bars_{suite}_{metric}.tsv"] = "\n".join(lines) + "\n"
    return files
