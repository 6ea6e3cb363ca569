"""Run configuration: a YAML file with explicit units on every quantity.

Unit conventions
----------------
* angular quantities (Rabi frequencies, detunings, trap frequency) are
  written as cyclic frequencies, ``"400 GHz"`` meaning 2π×400 GHz, or
  directly in ``rad/s``;
* plain rates (timing-grid frequency, AWG sample rate) are written in
  Hz/kHz/MHz/GHz and are *not* multiplied by 2π;
* times take s, ms, us, ns or ps; fields take G; voltages take V.

Precedence: built-in defaults < config file < ``--set section.key=value``
overrides < dedicated CLI flags.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from .constants import TWO_PI
from .io import config_hash

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed, incomplete or inconsistent configuration."""


_SCALE = {"": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ/]+)\s*$")


def _split(text, where):
    if isinstance(text, bool) or not isinstance(text, str):
        raise ConfigError(f"{where}: expected a quantity with units, got {text!r}")
    m = _QTY.match(text)
    if not m:
        raise ConfigError(f"{where}: cannot parse quantity {text!r}")
    return float(m.group(1)), m.group(2)


def parse_angular(text, where="value") -> float:
    """Cyclic frequency with units -> rad/s; ``rad/s`` passes through."""
    value, unit = _split(text, where)
    if unit == "rad/s":
        return value
    if unit.endswith("Hz") and unit[:-2] in _SCALE:
        return TWO_PI * value * _SCALE[unit[:-2]]
    raise ConfigError(f"{where}: unit {unit!r} is not a frequency")


def parse_rate(text, where="value") -> float:
    value, unit = _split(text, where)
    if unit.endswith("Hz") and unit[:-2] in _SCALE:
        return value * _SCALE[unit[:-2]]
    raise ConfigError(f"{where}: unit {unit!r} is not a rate in Hz")


def parse_time(text, where="value") -> float:
    value, unit = _split(text, where)
    if unit not in _TIME:
        raise ConfigError(f"{where}: unit {unit!r} is not a time")
    return value * _TIME[unit]


def _unit(symbol):
    def parse(text, where="value"):
        value, unit = _split(text, where)
        if unit != symbol:
            raise ConfigError(f"{where}: expected unit {symbol!r}, got {unit!r}")
        return value
    return parse


def _number(text, where="value"):
    # YAML 1.1 reads exponent forms without a dot ("1e-4") as strings
    if isinstance(text, str):
        try:
            return float(text.strip())
        except ValueError:
            pass
    if isinstance(text, bool) or not isinstance(text, (int, float)):
        raise ConfigError(f"{where}: expected a plain number, got {text!r}")
    return float(text)


def _integer(text, where="value"):
    if isinstance(text, bool) or not isinstance(text, int):
        raise ConfigError(f"{where}: expected an integer, got {text!r}")
    return int(text)


def _boolean(text, where="value"):
    if not isinstance(text, bool):
        raise ConfigError(f"{where}: expected true/false, got {text!r}")
    return text


def _string(text, where="value"):
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected a string, got {text!r}")
    return text


def _list_of(parser):
    def parse(items, where="value"):
        if not isinstance(items, list) or not items:
            raise ConfigError(f"{where}: expected a non-empty list")
        return [parser(v, f"{where}[{i}]") for i, v in enumerate(items)]
    return parse


PULSE_UNITS = {
    "omega0": parse_angular, "Delta": parse_angular, "delta0": parse_angular,
    "omega_e": parse_angular, "tau": parse_time, "t_d": parse_time,
}


def _axis(spec, where="value"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = set(spec) - {"name", "lo", "hi", "count", "scale"}
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    try:
        name = _string(spec["name"], f"{where}.name")
        unit = PULSE_UNITS.get(name)
        if unit is None:
            raise ConfigError(f"{where}.name: cannot sweep {name!r}")
        return {
            "name": name,
            "lo": unit(spec["lo"], f"{where}.lo"),
            "hi": unit(spec["hi"], f"{where}.hi"),
            "count": _integer(spec["count"], f"{where}.count"),
            "scale": _string(spec.get("scale", "linear"), f"{where}.scale"),
        }
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None


SCHEMA = {
    "run": {"out_dir": _string, "threads": _integer, "tol": _number},
    "system": {"model": _string, "splitting": parse_angular},
    "protocol": {
        "name": _string, "omega0": parse_angular, "tau": parse_time, "Delta": parse_angular,
        "delta0": parse_angular, "t_d": parse_time, "omega_e": parse_angular,
        "z": _integer, "reverse": _boolean,
    },
    "sdk_map": {"x": _axis, "y": _axis},
    "robustness": {
        "protocols": _list_of(_string), "kinds": _list_of(_string),
        "lo": _number, "hi": _number, "count": _integer, "n_pairs": _integer,
    },
    "delay_scan": {"lo": parse_time, "hi": parse_time, "count": _integer, "n_pairs": _integer},
    "trap": {"omega": parse_angular, "eta": _number, "nbar_c": _number, "nbar_s": _number},
    "gate": {
        "schemes": _list_of(_string), "n": _list_of(_integer), "starts": _integer,
        "rng_seed": _integer, "epsilon": _number, "n_pairs": _integer,
    },
    "gate_scan": {"f_bw": _list_of(parse_rate), "t0": parse_time, "mode": _string},
    "trajectory": {"kind": _string, "scheme": _string, "n": _integer, "f_bw": parse_rate},
    "waveform": {
        "sample_rate": parse_rate, "v_pi": _unit("V"), "rf_base": parse_rate,
        "modulation_depth": _number, "extinction": _number,
    },
    "zeeman": {"B_field": _unit("G")},
}

DEFAULTS = {
    "run": {"out_dir": "out", "tol": 1e-10},
    "system": {"model": "lambda", "splitting": "12.6428 GHz"},
    "protocol": {"name": "STIRAP"},
    "sdk_map": {
        "x": {"name": "omega0", "lo": "20 GHz", "hi": "100 GHz", "count": 9},
        "y": {"name": "t_d", "lo": "0 ps", "hi": "500 ps", "count": 11},
    },
    "robustness": {
        "protocols": ["SRT", "ARP", "STIRAP", "DE"], "kinds": ["intensity", "detuning"],
        "lo": -0.1, "hi": 0.1, "count": 11, "n_pairs": 10,
    },
    "delay_scan": {"lo": "-150 ps", "hi": "150 ps", "count": 31, "n_pairs": 10},
    "trap": {"omega": "1 MHz", "eta": 0.3, "nbar_c": 0.0, "nbar_s": 0.0},
    "gate": {
        "schemes": ["GZC", "FRAG"], "n": [1, 2, 3, 4, 5, 6, 7, 8], "starts": 200,
        "rng_seed": 0, "epsilon": 0.0, "n_pairs": 10,
    },
    "gate_scan": {
        "f_bw": ["100 MHz", "200 MHz", "500 MHz", "1 GHz", "2 GHz", "5 GHz", "10 GHz"],
        "t0": "0 s", "mode": "snap",
    },
    "trajectory": {"kind": "sdk", "scheme": "GZC", "n": 1, "f_bw": "1 GHz"},
    "waveform": {"sample_rate": "100 GHz", "v_pi": "1 V", "rf_base": "10 GHz",
                 "modulation_depth": 4.2, "extinction": 0.0},
    "zeeman": {"B_field": "0 G"},
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration; every physical value in SI (angular in rad/s)."""

    schema_version: int
    sections: dict
    raw: dict

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def hash(self) -> str:
        # where outputs go and how many workers run them does not change results
        payload = {k: v for k, v in self.sections.items()}
        payload["run"] = {k: v for k, v in self.sections["run"].items()
                          if k not in ("out_dir", "threads")}
        return config_hash({"schema_version": self.schema_version, **payload})

    def pulse_params(self) -> dict:
        return {k: v for k, v in self["protocol"].items() if k != "name"}


def _merge(base: dict, update: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key not in ("x", "y"):
            out[key] = _merge(out[key], value, f"{where}{key}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_override(text: str) -> tuple[list[str], object]:
    """``section.key=value`` -> (path, YAML-decoded value)."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    path, value = text.split("=", 1)
    keys = path.strip().split(".")
    if len(keys) < 2:
        raise ConfigError(f"override {text!r} must name section.key")
    try:
        return keys, yaml.safe_load(value)
    except yaml.YAMLError as exc:
        raise ConfigError(f"override {text!r}: {exc}") from None


def build_config(data: dict | None = None, overrides=()) -> RunConfig:
    """Validate ``data`` (already loaded YAML) on top of the defaults."""
    data = copy.deepcopy(data or {})
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping")
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    merged = _merge(DEFAULTS, data)
    for keys, value in overrides:
        node = merged
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {'.'.join(keys)} crosses a scalar")
        node[keys[-1]] = value
    sections = {}
    for name, section in merged.items():
        schema = SCHEMA.get(name)
        if schema is None:
            raise ConfigError(f"unknown section {name!r}")
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        unknown = set(section) - set(schema)
        if unknown:
            raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
        sections[name] = {k: schema[k](v, f"{name}.{k}") for k, v in section.items()}
    return RunConfig(SCHEMA_VERSION, sections, merged)


def load_config(path=None, overrides=()) -> RunConfig:
    data = {}
    if path is not None:
        text = Path(path).read_text()  # OSError is an I/O failure, not a config error
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return build_config(data, overrides)
