"""
manifest.py
-----------
Experiment manifests: one command plus its parameters, output path and seed.

Command-line flags and manifest files go through the same schema, so an
experiment committed as JSON and the equivalent flag invocation validate
identically and produce the same bytes.

Manifest file format:
    {
      "command": "plr-curve",
      "parameters": {"l": 5, "k": 2, "loads": [1.0, 1.2], "users": 1000, "trials": 200},
      "output_path": "plr_lambda1.csv",
      "seed": 20240101
    }
"""

from __future__ import annotations

# std modules
import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Mapping

# universal imports
from utils.config import logger

# local imports
from config import Config
from errors import FileAccessError, ValidationError

# ---------------------------------------------------------------------------
# Casting helpers
# ---------------------------------------------------------------------------

def _to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("booleans are not integers")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        return int(value.strip())
    raise ValueError(f"not an integer: {value!r}")


def _to_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.strip())
    raise ValueError(f"not a number: {value!r}")


def _to_floats(value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [v for v in value.split(",") if v.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ValueError(f"not a list of numbers: {value!r}")
    return tuple(_to_float(v) for v in parts)


def _to_path(value: Any) -> Path:
    if not isinstance(value, (str, Path)) or not str(value).strip():
        raise ValueError(f"not a file path: {value!r}")
    return Path(value)


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    cast:  Callable[[Any], Any]
    check: Callable[[Any], bool]
    rule:  str


PARAMS: dict[str, ParamSpec] = {
    "k":      ParamSpec(_to_int,   lambda v: v >= 1,             "integer >= 1"),
    "eps":    ParamSpec(_to_float, lambda v: 0.0 < v <= 0.1,     "0 < eps <= 0.1"),
    "l":      ParamSpec(_to_int,   lambda v: 1 <= v <= 60,       "integer in [1, 60]"),
    "a_star": ParamSpec(_to_float, lambda v: v > 0.0,            "positive number"),
    "dist":   ParamSpec(_to_path,  lambda v: True,               "file path"),
    "g_tol":  ParamSpec(_to_float, lambda v: v > 0.0,            "positive number"),
    "loads":  ParamSpec(_to_floats, lambda v: len(v) > 0 and all(g > 0.0 for g in v),
                        "non-empty list of positive loads"),
    "load":   ParamSpec(_to_float, lambda v: v > 0.0,            "positive number"),
    "users":  ParamSpec(_to_int,   lambda v: v >= 1,             "integer >= 1"),
    "trials": ParamSpec(_to_int,   lambda v: v >= 1,             "integer >= 1"),
    "threads": ParamSpec(_to_int,  lambda v: v >= 1,             "integer >= 1"),
    "ptx":    ParamSpec(_to_float, lambda v: v > 0.0,            "positive number"),
    "pc":     ParamSpec(_to_float, lambda v: v >= 0.0,           "non-negative number"),
    "noise":  ParamSpec(_to_float, lambda v: v > 0.0,            "positive number"),
    "l_max":  ParamSpec(_to_int,   lambda v: 1 <= v <= 60,       "integer in [1, 60]"),
    "points": ParamSpec(_to_int,   lambda v: v >= 2,             "integer >= 2"),
}

_DIST_SOURCE = ("dist", "l", "a_star")

SCHEMAS: dict[str, tuple[str, ...]] = {
    "design":     ("k", "eps", "l", "g_tol"),
    "threshold":  _DIST_SOURCE + ("k", "g_tol"),
    "plr-curve":  _DIST_SOURCE + ("k", "loads", "users", "trials", "threads"),
    "simulate":   _DIST_SOURCE + ("k", "load", "users", "trials", "threads"),
    "energy":     ("ptx", "pc", "noise", "users", "l_max", "a_star"),
    "table1":     ("l_max", "a_star"),
    "stop-curve": ("a_star", "l", "points"),
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "plr-curve": ("loads",),
    "simulate":  ("load",),
}

COMMANDS = tuple(SCHEMAS)


def defaults(config: Config, command: str) -> dict[str, Any]:
    base = {
        "k":       config.mpr,
        "eps":     config.epsilon_target,
        "l":       config.truncation,
        "a_star":  config.a_star,
        "g_tol":   config.g_tol,
        "users":   config.num_users,
        "trials":  config.trials,
        "threads": config.threads,
        "ptx":     config.p_tx,
        "pc":      config.p_c,
        "noise":   config.noise_power,
        "l_max":   config.table_l_max if command == "table1" else config.l_max,
        "points":  200,
    }
    return {name: base[name] for name in SCHEMAS[command] if name in base}


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentManifest:
    command:     str
    parameters:  Mapping[str, Any]
    output_path: Path | None
    seed:        int


def build_manifest(
    command:     str | None,
    parameters:  Mapping[str, Any],
    output_path: Path | str | None,
    seed:        Any,
    config:      Config,
) -> ExperimentManifest:
    """Validate parameters against the command's schema and fill defaults."""
    if command not in SCHEMAS:
        raise ValidationError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")

    unknown = sorted(set(parameters) - set(SCHEMAS[command]))
    if unknown:
        raise ValidationError(f"parameters not accepted by '{command}': {', '.join(unknown)}")
    missing = [name for name in REQUIRED.get(command, ()) if parameters.get(name) is None]
    if missing:
        raise ValidationError(f"'{command}' requires: {', '.join(missing)}")

    values = defaults(config, command)
    for name, raw in parameters.items():
        if raw is None:
            continue
        spec = PARAMS[name]
        try:
            value = spec.cast(raw)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"parameter '{name}': {e}") from e
        if not spec.check(value):
            raise ValidationError(f"parameter '{name}' must be {spec.rule}, got {raw!r}")
        values[name] = value

    try:
        seed_value = config.seed if seed is None else _to_int(seed)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"seed: {e}") from e
    if not 0 <= seed_value < 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed_value}")

    return ExperimentManifest(
        command=command,
        parameters=MappingProxyType(values),
        output_path=None if output_path is None else _to_path(output_path),
        seed=seed_value,
    )


def read_manifest_file(path: Path | str) -> dict[str, Any]:
    """Raw manifest fields; validation happens in build_manifest."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as e:
        raise FileAccessError(f"Could not read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise FileAccessError(f"Manifest {path} is not valid JSON: {e}") from e

    if not isinstance(obj, dict):
        raise ValidationError(f"manifest {path} must be a JSON object")
    extra = sorted(set(obj) - {"command", "parameters", "output_path", "seed"})
    if extra:
        raise ValidationError(f"manifest {path} has unknown fields: {', '.join(extra)}")
    if not isinstance(obj.get("parameters", {}), dict):
        raise ValidationError(f'manifest {path}: "parameters" must be an object')

    logger.info(f"Loaded manifest {path.name} ({obj.get('command')})")
    return {
        "command":     obj.get("command"),
        "parameters":  dict(obj.get("parameters", {})),
        "output_path": obj.get("output_path"),
        "seed":        obj.get("seed"),
    }
