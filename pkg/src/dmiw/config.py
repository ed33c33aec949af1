"""Flat ``key = value`` experiment configuration with unit suffixes.

Lines are ``key = value``; ``#`` starts a comment.  Physical quantities take an
optional unit suffix ("0.01mm", "0.5s", "196632me", "1.2e-5T/m"); a bare number
is read in SI.  Every error names the offending line.
"""

import dataclasses
import re

from scipy.constants import atomic_mass, m_e

from . import experiments as ex

UNITS = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "mass": {"kg": 1.0, "me": m_e, "u": atomic_mass},
    "field_gradient": {"T/m": 1.0},
}

QUANTITY = {
    "separation": "length", "slit_width": "length", "slit_sigma": "length", "sigma": "length",
    "detector_displacement": "length",
    "transit_time": "time", "field_on": "time", "field_off": "time", "stage_time": "time",
    "mass": "mass",
    "field_gradient": "field_gradient",
}

EXPERIMENTS = {
    "DoubleSlit": ex.DoubleSlitConfig,
    "OracleDoubleSlit": ex.DoubleSlitConfig,
    "SgSingle": ex.SGConfig,
    "SgChainAbsorber": ex.ChainConfig,
    "SgChainFlux": ex.ChainConfig,
    "FdStudy": ex.FdConfig,
}

# keys understood for every experiment, beside the experiment's own parameters
COMMON = {"name": None, "threads": None, "samples": None}
CHOICES = {"scheme": ("vector", "angles"), "sampling": ("stratified", "endpoint", "random")}
NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclasses.dataclass
class ExperimentConfig:
    experiment: str
    params: object
    seed: int = 0
    name: str = ""
    threads: int | None = None
    samples: int | None = None

    def echo(self):
        """Every effective parameter, defaults included, in SI."""
        d = {"experiment": self.experiment, "name": self.name, "seed": self.seed}
        for f in dataclasses.fields(self.params):
            v = getattr(self.params, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        if self.experiment == "OracleDoubleSlit":
            d["samples"] = self.samples
        return d


def parse_quantity(text, kind, line=None):
    m = NUMBER.match(text)
    if not m:
        raise ConfigError(f"cannot parse {text!r} as a number with unit", line)
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        return value
    table = UNITS[kind]
    if unit not in table:
        raise ConfigError(f"unit {unit!r} is not a {kind.replace('_', ' ')} unit "
                          f"(expected one of {', '.join(table)})", line)
    return value * table[unit]


def _convert(key, text, default, line):
    if key in QUANTITY:
        v = parse_quantity(text, QUANTITY[key], line)
        if not v > 0 and key not in ("field_on", "field_gradient"):
            raise ConfigError(f"{key} must be positive", line)
        return v
    if key == "K_list":
        try:
            return tuple(int(s) for s in text.split(","))
        except ValueError:
            raise ConfigError(f"K_list must be comma-separated integers, got {text!r}", line) from None
    if isinstance(default, bool):
        if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{key} must be true or false", line)
        return text.lower() in ("true", "1", "yes")
    if isinstance(default, int) or key in ("bins", "seed", "threads", "samples"):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {text!r}", line) from None
    if isinstance(default, float) or default is None:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {text!r}", line) from None
    if key in CHOICES and text not in CHOICES[key]:
        raise ConfigError(f"{key} must be one of {', '.join(CHOICES[key])}", line)
    return text


def parse_config(text):
    entries = {}
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"expected 'key = value', got {s!r}", i)
        k, v = (p.strip() for p in s.split("=", 1))
        if not k or not v:
            raise ConfigError(f"expected 'key = value', got {s!r}", i)
        if k in entries:
            raise ConfigError(f"duplicate key {k!r} (first on line {entries[k][1]})", i)
        entries[k] = (v, i)
    if "experiment" not in entries:
        raise ConfigError("missing required key 'experiment'")
    exp, eline = entries.pop("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r} (expected one of {', '.join(EXPERIMENTS)})", eline)
    cls = EXPERIMENTS[exp]
    fields = {f.name: f.default for f in dataclasses.fields(cls)}
    kwargs, extra = {}, {}
    seed = 0
    for k, (v, line) in entries.items():
        if k == "seed":
            seed = _convert(k, v, 0, line)
        elif k in COMMON:
            extra[k] = v if k == "name" else _convert(k, v, None, line)
        elif k in fields:
            kwargs[k] = _convert(k, v, fields[k], line)
        else:
            raise ConfigError(f"unknown key {k!r} for {exp}", line)
    if "seed" in fields:
        kwargs["seed"] = seed
    try:
        params = cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    _check(exp, params)
    return ExperimentConfig(exp, params, seed, extra.get("name") or exp.lower(),
                            extra.get("threads"), extra.get("samples"))


def _check(exp, p):
    for k in ("K", "I", "J", "runs", "stages"):
        if hasattr(p, k) and getattr(p, k) < 1:
            raise ConfigError(f"{k} must be at least 1")
    if exp in ("SgChainAbsorber", "SgChainFlux") and not set(p.axes) <= set("xyz"):
        raise ConfigError("axes must be letters from 'xyz'")
    if exp == "SgSingle" and not 0 <= p.c_up2 <= 1:
        raise ConfigError("c_up2 must lie in [0, 1]")
    if exp == "FdStudy" and (len(p.K_list) < 2 or min(p.K_list) < 3):
        raise ConfigError("K_list needs at least two entries, each at least 3")
