"""Declarative experiment configuration.

Configs live in a single YAML (or JSON) file with flat keys plus two
nested sections (``tolerances``, ``out``).  Unknown keys are hard errors
so that a typo in a tolerance name cannot silently widen a check, and a
seed is mandatory for anything stochastic.  Environment variables with
the ``POLYMER2D_`` prefix override scalar fields for CI use.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields

import yaml

ENV_PREFIX = "POLYMER2D_"

STOCHASTIC = {"moment-mc", "erdos-taylor", "gaussian-limit", "khas", "suite",
              "tau"}

_TOLERANCE_KEYS = {
    "identity_rel": 1e-10,
    "renewal_residual": 1e-12,
    "rho_cap": 10.0,
    "rho_band_lo": 0.5,
    "rho_band_hi": 2.0,
    "sigma_rule": 3.0,
}


class ConfigError(Exception):
    """Invalid or unknown configuration content."""


@dataclass
class ExperimentConfig:
    experiment: str
    n: int | None = None
    q: int | None = None
    t: int | None = None
    m: int | None = None
    beta_hat: float | None = None
    l: int | None = None
    gamma: float | None = None
    kappa_sq: float | None = None
    k: int | None = None
    mode: str | None = None
    check: str | None = None
    samples: int | None = None
    max_time: int | None = None
    seed: int | None = None
    threads: int = 1
    out: str | None = None
    format: str = "csv"
    plot: bool = True
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        unknown = set(self.tolerances) - set(_TOLERANCE_KEYS)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        if self.experiment in STOCHASTIC and self.seed is None:
            raise ConfigError(
                f"experiment {self.experiment!r} is stochastic: seed required")
        if self.beta_hat is not None and not 0 <= self.beta_hat < 1:
            raise ConfigError("beta_hat must lie in the subcritical window "
                              "[0, 1)")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def tolerance(self, key):
        if key not in _TOLERANCE_KEYS:
            raise ConfigError(f"unknown tolerance key {key!r}")
        return self.tolerances.get(key, _TOLERANCE_KEYS[key])

    def to_dict(self):
        return asdict(self)


def _coerce(raw, target_type):
    if target_type is bool and isinstance(raw, str):
        return raw.lower() in ("1", "true", "yes", "on")
    return target_type(raw)


def apply_env_overrides(cfg, environ=None):
    environ = os.environ if environ is None else environ
    known = {f.name: f for f in fields(ExperimentConfig)}
    updates = {}
    for key, val in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name not in known or name == "tolerances":
            raise ConfigError(f"unknown override {key}")
        cur = getattr(cfg, name)
        typ = type(cur) if cur is not None else str
        if name in ("n", "q", "t", "m", "l", "k", "samples", "seed",
                    "threads", "max_time"):
            typ = int
        elif name in ("beta_hat", "gamma", "kappa_sq"):
            typ = float
        elif name == "plot":
            typ = bool
        updates[name] = _coerce(val, typ)
    if not updates:
        return cfg
    data = cfg.to_dict()
    data.update(updates)
    return ExperimentConfig(**data)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        if str(path).endswith(".json"):
            raw = json.load(fh)
        else:
            raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config file must define a mapping")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
