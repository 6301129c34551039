"""YAML scenario documents <-> ``ScenarioConfig``.

A document is a flat mapping with three optional sections::

    scenario: entangled_trajectory
    n_runs: 10000
    seed: 0
    gamma: 0.0
    target_delta_epr: 1.4
    time_grid: {start: 0.0, stop: 1.0, num: 50}   # or an explicit list
    drive:    {amplitude: 0.0, phase: 0.0, duration: 1.0, target_mode: 0}
    entangle: {kappa: null, meter_variance: 0.5, efficiency: 1.0}
    readout:  {kappa: null, meter_variance: 0.5, efficiency: 1.0}

``entangle.kappa: null`` solves the coupling from ``target_delta_epr``;
``readout.kappa: null`` (or ``.inf``) is a noiseless readout. JSON is valid
YAML, so the config echo written to a summary file parses back unchanged.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any

import numpy as np
import yaml

from .dynamics import DriveConfig
from .errors import ConfigError, EprTrajectoryError
from .scenarios import PulseConfig, ScenarioConfig

_SECTIONS = {"drive": DriveConfig, "entangle": PulseConfig, "readout": PulseConfig}
_TOP = {f.name for f in dataclasses.fields(ScenarioConfig)}
_INT_KEYS = {"n_runs", "seed", "drive.target_mode"}


def _key_lines(text: str) -> dict[str, int]:
    """Map dotted keys to 1-based source lines, for error messages."""
    lines: dict[str, int] = {}
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    if not isinstance(node, yaml.MappingNode):
        return lines
    for k, v in node.value:
        lines[str(k.value)] = k.start_mark.line + 1
        if isinstance(v, yaml.MappingNode):
            for k2, _ in v.value:
                lines[f"{k.value}.{k2.value}"] = k2.start_mark.line + 1
    return lines


def _where(key: str, lines: dict[str, int]) -> str:
    return f"{key!r} (line {lines[key]})" if key in lines else repr(key)


def _number(key: str, value: Any, lines, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{_where(key, lines)} must be a number, got {value!r}")
    if key in _INT_KEYS:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{_where(key, lines)} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _time_grid(value: Any, lines) -> tuple[float, ...]:
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "num"}
        if unknown or set(value) != {"start", "stop", "num"}:
            raise ConfigError(
                f"{_where('time_grid', lines)} mapping needs exactly start, stop, num"
            )
        num = value["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError(f"{_where('time_grid', lines)} num must be an integer >= 1")
        start = _number("time_grid.start", value["start"], lines)
        stop = _number("time_grid.stop", value["stop"], lines)
        return tuple(float(t) for t in np.linspace(start, stop, num))
    if not isinstance(value, list):
        raise ConfigError(f"{_where('time_grid', lines)} must be a list or start/stop/num mapping")
    return tuple(_number("time_grid", t, lines) for t in value)


def config_from_dict(doc: Any, lines: dict[str, int] | None = None) -> ScenarioConfig:
    lines = lines or {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    unknown = set(doc) - _TOP
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key {_where(key, lines)}")
    if "scenario" not in doc:
        raise ConfigError("missing required key 'scenario'")

    kwargs: dict[str, Any] = {"scenario": doc["scenario"]}
    for key, value in doc.items():
        if key == "scenario":
            continue
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"{_where(key, lines)} must be a mapping")
            allowed = {f.name for f in dataclasses.fields(cls)}
            bad = set(value) - allowed
            if bad:
                raise ConfigError(f"unknown key {_where(f'{key}.{sorted(bad)[0]}', lines)}")
            section = {}
            for k, v in value.items():
                dotted = f"{key}.{k}"
                section[k] = _number(dotted, v, lines, allow_none=(k == "kappa"))
                if k == "kappa" and key == "readout" and section[k] == math.inf:
                    section[k] = None
            try:
                kwargs[key] = cls(**section)
            except EprTrajectoryError as exc:
                raise ConfigError(f"invalid section {_where(key, lines)}: {exc}") from None
        elif key == "time_grid":
            kwargs[key] = _time_grid(value, lines)
        else:
            kwargs[key] = _number(key, value, lines, allow_none=(key == "target_delta_epr"))
    if not isinstance(kwargs["scenario"], str):
        raise ConfigError(f"{_where('scenario', lines)} must be a string")
    try:
        return ScenarioConfig(**kwargs)
    except ConfigError:
        raise
    except EprTrajectoryError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML (or JSON) scenario document."""
    try:
        doc = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse config{where}: {getattr(exc, 'problem', exc)}") from None
    return config_from_dict(doc, lines)


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    """JSON-ready echo of a config; ``parse_config`` inverts it exactly."""
    out = dataclasses.asdict(config)
    out["time_grid"] = list(config.time_grid)
    return out
