"""Result rows, the fixed results.csv schema, and run manifests.

The column set is identical for every suite; descriptors that do not apply
to a suite are left empty.  No field ever contains a comma, so the CSV
needs no quoting.  Floats print via ``repr``, the shortest decimal string
that round-trips, which is what makes byte-identical reruns feasible.
"""
from __future__ import annotations

import datetime
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .config import SchemaMismatch

COLUMNS = (
    "suite",
    "agent",
    "d",
    "train_size",
    "temperature",
    "flip_fraction",
    "noise_variance",
    "prior_variance",
    "n_actions",
    "horizon",
    "metric",
    "value",
    "std_error",
    "seed",
)

_INT_COLUMNS = ("d", "train_size", "n_actions", "horizon", "seed")
_FLOAT_COLUMNS = ("temperature", "flip_fraction", "noise_variance", "prior_variance", "value", "std_error")


@dataclass(frozen=True)
class ResultRow:
    """One measurement: a metric value for one agent in one setting."""

    suite: str
    agent: str
    metric: str
    value: float
    std_error: float | None
    seed: int | None
    d: int | None = None
    train_size: int | None = None
    temperature: float | None = None
    flip_fraction: float | None = None
    noise_variance: float | None = None
    prior_variance: float | None = None
    n_actions: int | None = None
    horizon: int | None = None

    def cells(self) -> tuple[str, ...]:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        return tuple(format_cell(name, values[name]) for name in COLUMNS)

    def key(self) -> tuple[str, ...]:
        """Everything but value and std_error; unique within one file."""
        cells = dict(zip(COLUMNS, self.cells()))
        return tuple(cells[name] for name in COLUMNS if name not in ("value", "std_error"))


def format_cell(column: str, value) -> str:
    if value is None:
        return ""
    if column in _INT_COLUMNS:
        return str(int(value))
    if column in _FLOAT_COLUMNS:
        return repr(float(value))
    return str(value)


def render_results(rows: Sequence[ResultRow]) -> str:
    seen: set[tuple[str, ...]] = set()
    lines = [",".join(COLUMNS)]
    for row in rows:
        key = row.key()
        if key in seen:
            raise ValueError(f"duplicate result key: {key}")
        seen.add(key)
        lines.append(",".join(row.cells()))
    return "\n".join(lines) + "\n"


def write_results(path: str, rows: Sequence[ResultRow]) -> None:
    text = render_results(rows)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def read_results(path: str) -> list[dict[str, object]]:
    """Read one results.csv back into dictionaries.

    The header must match the documented schema exactly; numeric cells are
    parsed back to int/float and empty cells to None.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or tuple(lines[0].split(",")) != COLUMNS:
        raise SchemaMismatch(f"{path}: header does not match the results schema")
    rows: list[dict[str, object]] = []
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(COLUMNS):
            raise SchemaMismatch(f"{path}:{number}: expected {len(COLUMNS)} cells, got {len(cells)}")
        row: dict[str, object] = {}
        for name, cell in zip(COLUMNS, cells):
            if cell == "":
                row[name] = None
            elif name in _INT_COLUMNS:
                try:
                    row[name] = int(cell)
                except ValueError as exc:
                    raise SchemaMismatch(f"{path}:{number}: bad integer {cell!r} in {name}") from exc
            elif name in _FLOAT_COLUMNS:
                try:
                    row[name] = float(cell)
                except ValueError as exc:
                    raise SchemaMismatch(f"{path}:{number}: bad number {cell!r} in {name}") from exc
            else:
                row[name] = cell
        rows.append(row)
    return rows


def render_manifest(hash_hex: str, seed: int, version: str, created: str | None = None) -> str:
    if created is None:
        created = datetime.datetime.now(datetime.timezone.utc).isoformat()
    lines = [
        f"config_hash={hash_hex}",
        f"seed={seed}",
        f"code_version={version}",
        f"created={created}",
    ]
    return "\n".join(lines) + "\n"


def write_manifest(path: str, hash_hex: str, seed: int, version: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(render_manifest(hash_hex, seed, version))


def render_trace(values: Iterable[float]) -> str:
    """Two-column plot data: 1-based step index, then the value at it."""
    lines = [f"{t}\t{repr(float(v))}" for t, v in enumerate(values, start=1)]
    return "\n".join(lines) + "\n"
