"""Run configuration and its flat ``key = value`` file format.

Keys are dotted paths into :class:`RunConfig`, for example::

    seed = 3
    strategy = max-gap
    lidar.max_range = 3.0
    motion.slip_probability = 0.02
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from .lidar import LidarConfig
from .motion import MotionConfig
from .slam_particle import FilterNoise

Slam = Literal["none", "similarity", "particle"]


@dataclass(frozen=True)
class NavConfig:
    gap_threshold: float = 2.5
    min_gap_degrees: int = 5
    clearance_margin: float = 0.1
    frontier_depth: float = 0.25


@dataclass(frozen=True)
class SlamConfig:
    particles: int = 500
    jump_threshold: float = 0.3
    feature_max_range: float = 2.5
    landmark_merge_radius: float = 0.15
    match_gate: float = 0.5
    max_iterations: int = 50
    tolerance: float = 1e-9
    resample_ess_fraction: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    environment: str = ""
    seed: int = 0
    strategy: Literal["min-gap", "max-gap"] = "min-gap"
    slam: Slam = "none"
    lidar: LidarConfig = field(default_factory=LidarConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    filter: FilterNoise = field(default_factory=FilterNoise)
    slam_params: SlamConfig = field(default_factory=SlamConfig)
    nav: NavConfig = field(default_factory=NavConfig)
    max_nodes: int = 150
    max_steps: int = 40000

    def __post_init__(self):
        if self.max_nodes <= 0 or self.max_steps <= 0:
            raise ValueError("limits must be positive")
        if self.strategy not in ("min-gap", "max-gap"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.slam not in ("none", "similarity", "particle"):
            raise ValueError(f"unknown slam mode {self.slam!r}")

    @classmethod
    def noiseless(cls, **kw) -> "RunConfig":
        return cls(lidar=LidarConfig.noiseless(), motion=MotionConfig.noiseless(), **kw)


def _coerce(value: str, current: Any) -> Any:
    if isinstance(current, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return value


def with_overrides(cfg: RunConfig, overrides: dict[str, str]) -> RunConfig:
    """Apply dotted-key string overrides, coercing to the type of each default."""
    nested: dict[str, dict[str, str]] = {}
    top: dict[str, Any] = {}
    for key, value in overrides.items():
        head, _, rest = key.partition(".")
        names = {f.name for f in dataclasses.fields(cfg)}
        if head not in names:
            raise KeyError(f"unknown config key {key!r}")
        if rest:
            nested.setdefault(head, {})[rest] = value
        else:
            top[head] = _coerce(value, getattr(cfg, head))
    for head, sub in nested.items():
        obj = getattr(cfg, head)
        if not dataclasses.is_dataclass(obj):
            raise KeyError(f"{head!r} has no sub-keys")
        names = {f.name for f in dataclasses.fields(obj)}
        changes = {}
        for k, v in sub.items():
            if k not in names:
                raise KeyError(f"unknown config key {head}.{k}")
            changes[k] = _coerce(v, getattr(obj, k))
        top[head] = dataclasses.replace(obj, **changes)
    return dataclasses.replace(cfg, **top)


def parse_config(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return with_overrides(base or RunConfig(), parse_config(Path(path).read_text(encoding="utf-8")))


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if dataclasses.is_dataclass(v):
            for g in dataclasses.fields(v):
                lines.append(f"{f.name}.{g.name} = {getattr(v, g.name)}")
        else:
            lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
