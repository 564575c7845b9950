"""Pipeline configuration file.

A flat ``key = value`` file; ``#`` starts a comment, blank lines are ignored,
keys are case-sensitive and may appear at most once::

    # segmentation
    epsilon = 0.85
    min_pts = 6
    # fitting
    delta_theta0 = 0.39269908169872414
    vertex_k = 3
    superpose_threshold = 0.3
    spread_threshold = 0.5
    min_cluster_size = 4
    baseline_resolution = 0.008726646259971648

Every key is optional; CLI flags override file values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from lshapefit.fitting import FitConfig
from lshapefit.segmentation import DbscanParams


class ConfigError(ValueError):
    pass


_DBSCAN_KEYS = {"epsilon": float, "min_pts": int}
_FIT_KEYS = {
    "delta_theta0": float,
    "vertex_k": int,
    "superpose_threshold": float,
    "spread_threshold": float,
    "min_cluster_size": int,
}
_OTHER_KEYS = {"baseline_resolution": float}
KEYS = {**_DBSCAN_KEYS, **_FIT_KEYS, **_OTHER_KEYS}


@dataclass(frozen=True)
class PipelineConfig:
    dbscan: DbscanParams = field(default_factory=DbscanParams)
    fit: FitConfig = field(default_factory=FitConfig)
    baseline_resolution: float = math.radians(0.5)

    def as_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self.dbscan, f.name) for f in fields(self.dbscan)}
        out.update({f.name: getattr(self.fit, f.name) for f in fields(self.fit)})
        out["baseline_resolution"] = self.baseline_resolution
        return out


def _convert(key: str, raw: str, lineno: int | None) -> Any:
    where = f"line {lineno}: " if lineno is not None else ""
    kind = KEYS[key]
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"{where}{key} expects {kind.__name__}, got {raw!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{where}{key} must be finite")
    return value


def parse_config(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, value, lineno)
    return values


def build_config(values: Mapping[str, Any], base: PipelineConfig | None = None) -> PipelineConfig:
    """Overlay ``values`` (already typed) on ``base``; invalid combinations raise ``ConfigError``."""
    base = base or PipelineConfig()
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        dbscan = replace(base.dbscan, **{k: v for k, v in values.items() if k in _DBSCAN_KEYS})
        fit = replace(base.fit, **{k: v for k, v in values.items() if k in _FIT_KEYS})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    resolution = values.get("baseline_resolution", base.baseline_resolution)
    if not resolution > 0:
        raise ConfigError("baseline_resolution must be > 0")
    return PipelineConfig(dbscan, fit, resolution)


def load_config(path, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    values: dict[str, Any] = {}
    if path is not None:
        values.update(parse_config(Path(path).read_text(encoding="utf-8")))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values)
