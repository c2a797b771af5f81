"""Experiment runner: config parsing, suite dispatch, reports, and sweeps."""

from .config import (
    MAX_SEED,
    SUITES,
    ConfigError,
    ExperimentConfig,
    SchemaMismatch,
    build_config,
    canonical_text,
    config_hash,
    load_config,
    parse_params,
    read_config_file,
)
from .main import main
from .report import MODES, aggregate, bar_files, load_rows, render_report
from .results import (
    COLUMNS,
    ResultRow,
    format_cell,
    read_results,
    render_manifest,
    render_results,
    render_trace,
    write_manifest,
    write_results,
)
from .suites import SuiteOutput, execute_run, run_suite
from .sweep import SweepCell, expand_cells, materialize_config, run_cell, run_sweep

__all__ = [
    "COLUMNS",
    "MAX_SEED",
    "MODES",
    "SUITES",
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "SchemaMismatch",
    "SuiteOutput",
    "SweepCell",
    "aggregate",
    "bar_files",
    "build_config",
    "canonical_text",
    "config_hash",
    "execute_run",
    "expand_cells",
    "format_cell",
    "load_config",
    "load_rows",
    "main",
    "materialize_config",
    "parse_params",
    "read_config_file",
    "read_results",
    "render_manifest",
    "render_report",
    "render_results",
    "render_trace",
    "run_cell",
    "run_suite",
    "run_sweep",
    "write_manifest",
    "write_results",
]
