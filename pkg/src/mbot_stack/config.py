"""One config file for the whole stack, with strict key checking.

YAML on disk; environment variables override single keys as
``MBOT_<SECTION>_<KEY>`` (e.g. MBOT_BRIDGE_PORT=9000).
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field, fields

import yaml

from .board import DriveConfig
from .nav import NavConfig
from .sim import LidarConfig
from .slam import SlamConfig
from .types import Pose2D, SlamMode


class ConfigError(ValueError):
    pass


@dataclass
class SimSection:
    start_x: float = 5.0
    start_y: float = 5.0
    start_theta: float = 0.0
    encoder_noise_sigma: float = 0.01  # fractional wheel-travel noise per step
    dt: float = 0.02                   # s per stack tick
    realtime: bool = True
    time_scale: float = 1.0            # sim seconds per wall second when realtime

    def start_pose(self) -> Pose2D:
        return Pose2D(self.start_x, self.start_y, self.start_theta, 0)


@dataclass
class BridgeSection:
    host: str = "0.0.0.0"
    port: int = 8765
    webroot: str = ""   # empty: no static files served
    enabled: bool = True


@dataclass
class StackConfig:
    seed: int = 0
    world_map: str = ""          # ground-truth world file; empty: built-in room
    load_map: str = ""           # SLAM prior map (localization mode)
    save_map: str = ""           # write the SLAM map here on shutdown
    slam_mode: str = "FULL_SLAM"
    drive: DriveConfig = field(default_factory=DriveConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    slam: SlamConfig = field(default_factory=SlamConfig)
    nav: NavConfig = field(default_factory=NavConfig)
    sim: SimSection = field(default_factory=SimSection)
    bridge: BridgeSection = field(default_factory=BridgeSection)

    def initial_slam_mode(self) -> SlamMode:
        try:
            return SlamMode(self.slam_mode)
        except ValueError:
            raise ConfigError(f"invalid slam_mode: {self.slam_mode!r}; "
                              f"one of {[m.value for m in SlamMode]}") from None

    def validate(self) -> None:
        self.initial_slam_mode()
        if not (0 < self.sim.dt <= 0.1):
            raise ConfigError("sim.dt must be in (0, 0.1]")
        if self.slam.num_particles < 1:
            raise ConfigError("slam.num_particles must be >= 1")
        if not (0 <= self.lidar.dropout_prob <= 1):
            raise ConfigError("lidar.dropout_prob must be in [0, 1]")
        if not (1 <= self.bridge.port <= 65535):
            raise ConfigError("bridge.port out of range")


# section names resolved from a default instance (field annotations are
# strings under deferred evaluation, so f.type cannot be inspected directly)
_SECTIONS = {f.name for f in fields(StackConfig)
             if dataclasses.is_dataclass(getattr(StackConfig(), f.name))}


def _coerce(value, current):
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        return str(value).lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple):
        if isinstance(value, str):
            value = [float(v) for v in value.split(",")]
        return tuple(value)
    return type(current)(value) if current is not None else value


def _apply_section(section_obj, data: dict, prefix: str):
    valid = {f.name for f in fields(section_obj)}
    updates = {}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"unknown config key: {prefix}{key}")
        updates[key] = _coerce(value, getattr(section_obj, key))
    return dataclasses.replace(section_obj, **updates)


def from_dict(data: dict) -> StackConfig:
    cfg = StackConfig()
    updates = {}
    for key, value in (data or {}).items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key} must be a mapping")
            updates[key] = _apply_section(getattr(cfg, key), value, f"{key}.")
        elif key in {f.name for f in fields(StackConfig)}:
            updates[key] = _coerce(value, getattr(cfg, key))
        else:
            raise ConfigError(f"unknown config key: {key}")
    cfg = dataclasses.replace(cfg, **updates)
    return cfg


def apply_env_overrides(cfg: StackConfig, environ=None) -> StackConfig:
    environ = os.environ if environ is None else environ
    for name, value in environ.items():
        if not name.startswith("MBOT_") or name == "MBOT_KERNELS":
            continue
        parts = name[5:].lower().split("_", 1)
        if parts[0] in _SECTIONS and len(parts) == 2:
            section = getattr(cfg, parts[0])
            key = parts[1]
            if not any(f.name == key for f in fields(section)):
                raise ConfigError(f"unknown config key from {name}")
            new = dataclasses.replace(
                section, **{key: _coerce(value, getattr(section, key))})
            cfg = dataclasses.replace(cfg, **{parts[0]: new})
        else:
            key = name[5:].lower()
            if not any(f.name == key for f in fields(StackConfig)):
                raise ConfigError(f"unknown config key from {name}")
            cfg = dataclasses.replace(
                cfg, **{key: _coerce(value, getattr(cfg, key))})
    return cfg


def to_dict(cfg: StackConfig) -> dict:
    out = {}
    for f in fields(StackConfig):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            out[f.name] = {sf.name: _plain(getattr(value, sf.name))
                           for sf in fields(value)}
        else:
            out[f.name] = _plain(value)
    return out


def _plain(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def load_file(path: str) -> StackConfig:
    with open(path) as f:
        data = yaml.safe_load(f)
    return from_dict(data or {})


def defaults_yaml() -> str:
    return yaml.safe_dump(to_dict(StackConfig()), sort_keys=False)
