"""Run configuration: JSON documents with strict key checking.

A config is a nested JSON object; unknown keys are rejected with their
dotted path, defaults fill anything omitted, and the canonical hash of
the merged document is stamped into every JSON artifact for
reproducibility.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Any

DEFAULTS: dict[str, Any] = {
    "surface": {"kind": "round", "epsilon": 0.05, "path": None},
    "target": {"kind": "round"},
    "l": 1,
    "omega": 0.0,
    "grid": {"N": 2000},
    "solver": {"tol": 1e-10, "max_iter": 2000, "multistart": 0},
    "evolve": {"T": 1.0, "cfl": 0.4, "record_every": None},
    "stability": {"delta": 1e-3, "epsilon": 1e-2, "seed": 0},
    "diagnostics": {"delta_hoelder": 0.1},
    "output": {"directory": ".", "formats": ["csv", "json"]},
}


class ConfigError(ValueError):
    pass


def _merge(defaults, given, path=""):
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown key: {here}")
        if isinstance(defaults[key], dict) and not isinstance(val, dict):
            raise ConfigError(f"{here}: expected an object")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], val, here)
        else:
            out[key] = val
    return out


@dataclass
class RunConfig:
    data: dict[str, Any]

    def __getitem__(self, key):
        return self.data[key]

    @property
    def hash(self) -> str:
        """Canonical hash of the scientific fields (output paths excluded)."""
        hashed = {k: v for k, v in self.data.items() if k != "output"}
        return hashlib.sha256(
            json.dumps(hashed, sort_keys=True).encode()).hexdigest()


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config; defaults applied, unknown keys
    rejected, referenced files must exist at parse time."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    data = _merge(DEFAULTS, raw)
    _validate(data)
    return RunConfig(data)


def _validate(data):
    kind = data["surface"]["kind"]
    if kind not in ("round", "bumpy", "tabulated", "flat"):
        raise ConfigError(f"surface.kind: unknown kind {kind!r}")
    if kind == "tabulated":
        path = data["surface"]["path"]
        if not path or not os.path.exists(path):
            raise ConfigError(f"surface.path: file not found: {path!r}")
    if data["target"]["kind"] != "round":
        raise ConfigError("target.kind: only 'round' is available")
    if not isinstance(data["l"], int) or data["l"] < 1:
        raise ConfigError("l: must be an integer >= 1")
    if data["grid"]["N"] < 16:
        raise ConfigError("grid.N: must be at least 16")
    if not 0.0 < data["evolve"]["cfl"] < 1.0:
        raise ConfigError("evolve.cfl: must lie in (0, 1)")
    if data["evolve"]["T"] <= 0.0:
        raise ConfigError("evolve.T: must be positive")
    if data["stability"]["delta"] < 0.0:
        raise ConfigError("stability.delta: must be nonnegative")
    if not 0.0 < data["diagnostics"]["delta_hoelder"] < 0.5:
        raise ConfigError("diagnostics.delta_hoelder: must lie in (0, 1/2)")


def apply_overrides(data: dict, assignments: list[str]) -> dict:
    """Apply ``key.path=value`` overrides; values parsed as JSON when
    possible, kept as strings otherwise."""
    out = copy.deepcopy(data)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        node = out
        parts = key.split(".")
        for p in parts[:-1]:
            if p not in node or not isinstance(node[p], dict):
                raise ConfigError(f"unknown key: {key}")
            node = node[p]
        if parts[-1] not in node:
            raise ConfigError(f"unknown key: {key}")
        node[parts[-1]] = val
    return out


def build_surface(cfg: RunConfig):
    from .profiles import (bumpy_surface, flat_surface, round_surface,
                           tabulated_surface)
    kind = cfg["surface"]["kind"]
    if kind == "round":
        return round_surface()
    if kind == "bumpy":
        return bumpy_surface(cfg["surface"]["epsilon"])
    if kind == "flat":
        return flat_surface()
    return tabulated_surface(cfg["surface"]["path"])


def build_target(cfg: RunConfig):
    from .profiles import round_target
    return round_target()
