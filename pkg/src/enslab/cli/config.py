"""Experiment configuration: flat key=value files with one section per suite.

A config file looks like::

    [experiment]
    suite = bandit

    [bandit]
    d = 2
    n_actions = 4

Every key is checked against the suite's parameter table; unknown sections,
unknown keys, unparseable values, and out-of-range values all raise
:class:`ConfigError`.  Values never nest.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from typing import Callable, Mapping

SUITES = ("linreg", "testbed", "bandit")

_LINREG_FAMILIES = ("n", "p", "bp")
_BANDIT_FAMILIES = ("n", "p", "bp", "pw")

MAX_SEED = 2**64 - 1


class ConfigError(Exception):
    """Malformed or out-of-range experiment configuration."""


class SchemaMismatch(ConfigError):
    """A results file whose columns differ from the documented schema."""


@dataclass(frozen=True)
class _Param:
    parse: Callable[[str], object]
    check: Callable[[object], bool]
    expect: str
    default: object


def _int(text: str) -> int:
    return int(text, 10)


def _float(text: str) -> float:
    value = float(text)
    return value


def _family_list(allowed: tuple[str, ...]) -> Callable[[str], tuple[str, ...]]:
    def parse(text: str) -> tuple[str, ...]:
        names = [part.strip().lower() for part in text.split(",") if part.strip()]
        seen: list[str] = []
        for name in names:
            if name not in allowed:
                raise ValueError(f"unknown family {name!r} (allowed: {', '.join(allowed)})")
            if name not in seen:
                seen.append(name)
        if not seen:
            raise ValueError("family list is empty")
        return tuple(seen)

    return parse


def _positive(value) -> bool:
    return value > 0


def _nonnegative(value) -> bool:
    return value >= 0


def _fraction(value) -> bool:
    return 0.0 <= value <= 1.0


def _any(_value) -> bool:
    return True


_PARAM_TABLES: dict[str, dict[str, _Param]] = {
    "linreg": {
        "d": _Param(_int, _positive, "a positive integer", 2),
        "train_size": _Param(_int, _nonnegative, "a nonnegative integer", 10),
        "n_datasets": _Param(_int, lambda v: v >= 30, "an integer >= 30", 30),
        "noise_variance": _Param(_float, _positive, "a positive real", 1.0),
        "prior_variance": _Param(_float, _positive, "a positive real", 1.0),
        "lam": _Param(_float, _positive, "a positive real", 1.0),
        "anchor_variance": _Param(_float, _positive, "a positive real", 1.0),
        "families": _Param(
            _family_list(_LINREG_FAMILIES), _any, "families from {n,p,bp}", ("n", "p", "bp")
        ),
    },
    "testbed": {
        "d": _Param(_int, _positive, "a positive integer", 10),
        "train_size": _Param(_int, _positive, "a positive integer", 100),
        "temperature": _Param(_float, _positive, "a positive real", 0.1),
        "flip_fraction": _Param(_float, _fraction, "a real in [0, 1]", 0.0),
        "n_members": _Param(_int, _positive, "a positive integer", 30),
        "weight_decay": _Param(_float, _nonnegative, "a nonnegative real", 0.949),
        "prior_scale": _Param(_float, _nonnegative, "a nonnegative real", 3.0),
        "epochs": _Param(_int, _positive, "a positive integer", 200),
        "marginal_queries": _Param(_int, lambda v: v >= 100, "an integer >= 100", 1000),
        "anchor_pairs": _Param(_int, _positive, "a positive integer", 1000),
        "families": _Param(
            _family_list(_LINREG_FAMILIES), _any, "families from {n,p,bp}", ("n", "p", "bp")
        ),
    },
    "bandit": {
        "d": _Param(_int, _positive, "a positive integer", 2),
        "n_actions": _Param(_int, lambda v: v >= 2, "an integer >= 2", 4),
        "horizon": _Param(_int, _positive, "a positive integer", 200),
        "n_problems": _Param(_int, _positive, "a positive integer", 100),
        "prior_variance": _Param(_float, _positive, "a positive real", 1.0),
        "lam_n": _Param(_float, _positive, "a positive real", 0.01),
        "lam_p": _Param(_float, _positive, "a positive real", 3.0),
        "anchor_p": _Param(_float, _positive, "a positive real", 0.3),
        "lam_pw": _Param(_float, _positive, "a positive real", 3.0),
        "anchor_pw": _Param(_float, _positive, "a positive real", 0.3),
        "families": _Param(
            _family_list(_BANDIT_FAMILIES), _any, "families from {n,p,bp,pw}", ("n", "p", "bp")
        ),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment: suite, seed, output directory, params.

    ``params`` always contains every key of the suite's parameter table
    (defaults applied), so suite runners never re-check presence.
    """

    suite: str
    seed: int
    output_dir: str
    params: Mapping[str, object]

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r} (expected one of {', '.join(SUITES)})")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")


def read_config_file(path: str) -> tuple[str, dict[str, str]]:
    """Parse a config file into (suite, raw suite parameters).

    Raises ConfigError on syntax errors, a missing/duplicated suite name,
    unknown sections, or unknown keys.  Values stay as strings here;
    :func:`build_config` parses and range-checks them.
    """
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle, source=path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")
    experiment = dict(parser["experiment"])
    suite = experiment.pop("suite", None)
    if suite is None:
        raise ConfigError(f"{path}: [experiment] must set 'suite'")
    suite = suite.strip().lower()
    if suite not in SUITES:
        raise ConfigError(f"{path}: unknown suite {suite!r} (expected one of {', '.join(SUITES)})")
    if experiment:
        extras = ", ".join(sorted(experiment))
        raise ConfigError(f"{path}: unknown keys in [experiment]: {extras}")
    for section in parser.sections():
        if section not in ("experiment", suite):
            raise ConfigError(f"{path}: unexpected section [{section}] for suite {suite}")
    raw = dict(parser[suite]) if suite in parser else {}
    return suite, raw


def parse_params(suite: str, raw: Mapping[str, str]) -> dict[str, object]:
    """Parse and range-check raw string parameters against the suite table."""
    table = _PARAM_TABLES[suite]
    unknown = sorted(set(raw) - set(table))
    if unknown:
        raise ConfigError(f"unknown {suite} parameter(s): {', '.join(unknown)}")
    params: dict[str, object] = {}
    for name, spec in table.items():
        if name not in raw:
            params[name] = spec.default
            continue
        text = raw[name].strip()
        try:
            value = spec.parse(text)
        except ValueError as exc:
            raise ConfigError(f"{suite}.{name}: cannot parse {text!r}: {exc}") from exc
        if not spec.check(value):
            raise ConfigError(f"{suite}.{name}: {value!r} is not {spec.expect}")
        params[name] = value
    return params


def build_config(suite: str, raw: Mapping[str, str], seed: int, output_dir: str) -> ExperimentConfig:
    return ExperimentConfig(suite, seed, output_dir, parse_params(suite, raw))


def load_config(path: str, seed: int, output_dir: str) -> ExperimentConfig:
    suite, raw = read_config_file(path)
    return build_config(suite, raw, seed, output_dir)


def canonical_text(config: ExperimentConfig) -> str:
    """Canonical serialization of the validated parameters.

    Two config files that parse to the same suite and parameter values
    produce the same text (defaults included), so the manifest hash
    identifies the experiment semantically rather than byte-wise.
    """
    lines = [f"suite={config.suite}"]
    for name in sorted(config.params):
        value = config.params[name]
        if isinstance(value, tuple):
            rendered = ",".join(str(v) for v in value)
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{name}={rendered}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_text(config).encode("utf-8")).hexdigest()
