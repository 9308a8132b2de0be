"""JSON experiment configuration with strict key checking."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..kinetic.quadrature import DEFAULT_SPEC, QuadratureSpec

TOP_KEYS = ("experiment", "params", "output_dir", "seed", "quadrature")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    output_dir: str | None = None
    seed: int = 0
    quadrature: dict = field(default_factory=dict)

    def spec(self) -> QuadratureSpec:
        return DEFAULT_SPEC.with_(**self.quadrature) if self.quadrature else DEFAULT_SPEC

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _same_kind(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, (int, float)):
        return isinstance(value, (int, float)) and not isinstance(value, bool) or value in ("inf", "Infinity")
    if isinstance(default, (list, tuple)):
        return isinstance(value, list)
    if isinstance(default, str):
        return isinstance(value, str)
    return True


def resolve(raw: dict) -> ExperimentConfig:
    """Validate a parsed JSON object and fill in experiment defaults."""
    from .experiments import EXPERIMENTS
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; allowed: {list(TOP_KEYS)}")
    name = raw.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; valid experiments: {', '.join(EXPERIMENTS)}")
    defaults = EXPERIMENTS[name].defaults
    params = raw.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    bad = sorted(set(params) - set(defaults))
    if bad:
        raise ConfigError(f"unknown params {bad} for {name}; allowed: {sorted(defaults)}")
    for k, v in params.items():
        if defaults[k] is not None and not _same_kind(defaults[k], v):
            raise ConfigError(f"param {k!r} has the wrong type (got {type(v).__name__})")
    resolved = {**defaults, **params}
    quad = raw.get("quadrature", {}) or {}
    allowed = {f.name for f in dataclasses.fields(QuadratureSpec)}
    if not isinstance(quad, dict) or set(quad) - allowed:
        raise ConfigError(f"unknown quadrature keys {sorted(set(quad) - allowed)}; allowed: {sorted(allowed)}")
    try:
        DEFAULT_SPEC.with_(**quad)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature override: {exc}") from exc
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output_dir must be a string")
    return ExperimentConfig(name, resolved, out, seed, dict(quad))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return resolve(raw)
