"""Experiment configuration: versioned JSON with strict validation.

A config names the potential instance, the h ladder, the theta rule and the
default discretizations; every experiment derives its working grids from
these plus documented per-experiment refinements.  Validation is strict so a
typo fails at load time (exit code 2) rather than producing a silently
different sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grids import SpatialGrid, SpectralGrid, make_k_grid, make_spatial_grid
from .potentials import Potential

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "default_config"]

SCHEMA_VERSION = 1

# h ladders are asymptotic sweeps: enforce near-geometric spacing so the
# log-log fits are well conditioned (ratio spread within 25 percent)
GEOMETRIC_SPREAD = 1.25

_TOP_KEYS = {
    "schema_version", "name", "quick", "potential", "h_list", "n0",
    "theta_rule", "thetas", "spatial", "spectral", "rtol",
    "krein_index_attachment", "threads",
}


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    name: str = "default"
    quick: bool = False
    a: float = 0.0
    b: float = 1.0
    v0: float = 2.0
    h_list: tuple = (0.5, 0.35, 0.25, 0.18, 0.125)
    n0: int = 3
    theta_rule: str = "power"
    thetas: tuple | None = None
    x_min: float = -2.0
    x_max: float = 3.0
    n_x: int = 2049
    k_min: float = 0.05
    k_max: float = 12.0
    n_k: int = 1024
    rtol: float = 1e-12
    krein_index_attachment: str = "direct"
    threads: int | None = None

    def validate(self) -> "ExperimentConfig":
        if not self.b > self.a:
            raise ConfigError("potential needs b > a")
        if not self.v0 > 0.0:
            raise ConfigError("potential needs a positive lower bound v0 > 0")
        hs = np.asarray(self.h_list, dtype=float)
        if len(hs) < 4:
            raise ConfigError("h_list needs at least 4 values for rate fits")
        if np.any(hs <= 0.0):
            raise ConfigError("h values must be positive")
        if np.any(np.diff(hs) >= 0.0):
            raise ConfigError("h_list must be strictly decreasing")
        ratios = hs[1:] / hs[:-1]
        if ratios.max() / ratios.min() > GEOMETRIC_SPREAD:
            raise ConfigError("h_list must be close to geometric "
                              "(ratio spread above %.2f)" % GEOMETRIC_SPREAD)
        if int(self.n0) != self.n0 or self.n0 <= 2:
            raise ConfigError("n0 must be an integer greater than 2 "
                              "(the expansions are empty at n0 = 2)")
        if self.theta_rule not in ("power", "explicit"):
            raise ConfigError("theta_rule must be 'power' or 'explicit'")
        if self.theta_rule == "explicit":
            if self.thetas is None or len(self.thetas) != len(self.h_list):
                raise ConfigError("explicit theta_rule needs one theta per h")
        elif self.thetas is not None:
            raise ConfigError("thetas given but theta_rule is 'power'")
        if not (self.x_min < self.a and self.x_max > self.b):
            raise ConfigError("spatial box must contain [a, b]")
        if self.n_x < 64:
            raise ConfigError("spatial n must be at least 64")
        if not (0.0 < self.k_min < self.k_max):
            raise ConfigError("need 0 < k_min < k_max")
        if self.n_k < 64:
            raise ConfigError("spectral n_k must be at least 64")
        if not (0.0 < self.rtol <= 1e-6):
            raise ConfigError("rtol out of range (0, 1e-6]")
        if self.krein_index_attachment not in ("direct", "row", "column"):
            raise ConfigError("krein_index_attachment must be one of "
                              "direct/row/column")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        return self

    # derived objects

    def pot(self) -> Potential:
        return Potential(a=self.a, b=self.b, v0=self.v0)

    def theta_for(self, h: float) -> float:
        if self.theta_rule == "power":
            return float(h) ** self.n0
        return float(self.thetas[list(self.h_list).index(h)])

    def spatial_grid(self) -> SpatialGrid:
        return make_spatial_grid(self.a, self.b, self.x_min, self.x_max,
                                 self.n_x)

    def k_grid(self) -> SpectralGrid:
        return make_k_grid(self.k_min, self.k_max, self.n_k)


def _section(raw: dict, key: str, fields: dict) -> dict:
    got = raw.get(key, {})
    if not isinstance(got, dict):
        raise ConfigError(f"section '{key}' must be an object")
    unknown = set(got) - set(fields)
    if unknown:
        raise ConfigError(f"unknown keys in '{key}': {sorted(unknown)}")
    return {dst: got[src] for src, dst in fields.items() if src in got}


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, "
                          f"got {version!r}")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    for key in ("name", "quick", "n0", "theta_rule", "rtol",
                "krein_index_attachment", "threads"):
        if key in raw:
            kw[key] = raw[key]
    if "h_list" in raw:
        kw["h_list"] = tuple(float(h) for h in raw["h_list"])
    if "thetas" in raw and raw["thetas"] is not None:
        kw["thetas"] = tuple(float(t) for t in raw["thetas"])
    kw.update(_section(raw, "potential",
                       {"a": "a", "b": "b", "v0": "v0"}))
    kw.update(_section(raw, "spatial",
                       {"x_min": "x_min", "x_max": "x_max", "n": "n_x"}))
    kw.update(_section(raw, "spectral",
                       {"k_min": "k_min", "k_max": "k_max", "n_k": "n_k"}))
    try:
        cfg = ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw)


def default_config() -> ExperimentConfig:
    return ExperimentConfig().validate()
