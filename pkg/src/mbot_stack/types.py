"""Shared geometric and map types plus angle/grid math.

Everything here is a plain value type: safe to copy between threads,
JSON-serializable through ``to_dict``/``from_dict``, and byte-serializable
through ``encode``/``decode`` (the bus payload format).
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"non-finite angle: {a!r}")
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: x, y in meters, theta in radians, utime in microseconds."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    utime: int = 0

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta, "utime": self.utime}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose2D":
        return cls(x=float(d["x"]), y=float(d["y"]), theta=float(d["theta"]),
                   utime=int(d["utime"]))


@dataclass(frozen=True)
class Twist2D:
    """Body-frame velocity: vx forward, vy left (m/s), wz CCW (rad/s)."""

    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0
    utime: int = 0

    def to_dict(self) -> dict:
        return {"vx": self.vx, "vy": self.vy, "wz": self.wz, "utime": self.utime}

    @classmethod
    def from_dict(cls, d: dict) -> "Twist2D":
        return cls(vx=float(d["vx"]), vy=float(d["vy"]), wz=float(d["wz"]),
                   utime=int(d.get("utime", 0)))


@dataclass
class LidarScan:
    """One lidar revolution. Bearings are robot-frame, CCW from +x.

    A range <= 0 marks an invalid (dropped) beam.
    """

    utime: int
    ranges: np.ndarray  # float64, meters
    thetas: np.ndarray  # float64, radians

    def __post_init__(self):
        self.ranges = np.asarray(self.ranges, dtype=np.float64)
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        if self.ranges.shape != self.thetas.shape:
            raise ValueError("ranges and thetas length mismatch")

    @property
    def num_ranges(self) -> int:
        return int(self.ranges.shape[0])

    def __eq__(self, other) -> bool:
        return (isinstance(other, LidarScan)
                and self.utime == other.utime
                and np.array_equal(self.ranges, other.ranges)
                and np.array_equal(self.thetas, other.thetas))

    def to_dict(self) -> dict:
        return {"utime": self.utime,
                "num_ranges": self.num_ranges,
                "ranges": self.ranges.tolist(),
                "thetas": self.thetas.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LidarScan":
        scan = cls(utime=int(d["utime"]),
                   ranges=np.array(d["ranges"], dtype=np.float64),
                   thetas=np.array(d["thetas"], dtype=np.float64))
        if "num_ranges" in d and int(d["num_ranges"]) != scan.num_ranges:
            raise ValueError("num_ranges does not match array length")
        return scan


@dataclass
class OccupancyGrid:
    """Log-odds occupancy map.

    ``cells`` is int8 with shape (height, width), row-major; -128 is
    certainly free, +127 certainly occupied, 0 unknown. ``origin_x``,
    ``origin_y`` are the world coordinates of the corner of cell (0, 0).
    """

    origin_x: float
    origin_y: float
    resolution: float
    width: int
    height: int
    cells: np.ndarray
    utime: int = 0

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        self.cells = np.asarray(self.cells, dtype=np.int8)
        if self.cells.shape != (self.height, self.width):
            self.cells = self.cells.reshape(self.height, self.width)

    @classmethod
    def blank(cls, origin_x: float, origin_y: float, resolution: float,
              width: int, height: int) -> "OccupancyGrid":
        return cls(origin_x, origin_y, resolution, width, height,
                   np.zeros((height, width), dtype=np.int8))

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.origin_x, self.origin_y, self.resolution,
                             self.width, self.height, self.cells.copy(),
                             self.utime)

    def __eq__(self, other) -> bool:
        return (isinstance(other, OccupancyGrid)
                and self.origin_x == other.origin_x
                and self.origin_y == other.origin_y
                and self.resolution == other.resolution
                and self.width == other.width
                and self.height == other.height
                and self.utime == other.utime
                and np.array_equal(self.cells, other.cells))

    def to_dict(self, as_bytes: bool = True) -> dict:
        d = {"utime": self.utime,
             "origin_x": self.origin_x, "origin_y": self.origin_y,
             "resolution": self.resolution,
             "width": self.width, "height": self.height}
        if as_bytes:
            d["cells_b64"] = base64.b64encode(
                self.cells.astype(np.int8).tobytes()).decode("ascii")
        else:
            d["cells"] = self.cells.reshape(-1).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OccupancyGrid":
        width = int(d["width"])
        height = int(d["height"])
        if "cells_b64" in d:
            raw = base64.b64decode(d["cells_b64"])
            cells = np.frombuffer(raw, dtype=np.int8).copy()
        else:
            cells = np.array(d["cells"], dtype=np.int8)
        if cells.size != width * height:
            raise ValueError("cell count does not match width*height")
        return cls(origin_x=float(d["origin_x"]), origin_y=float(d["origin_y"]),
                   resolution=float(d["resolution"]), width=width, height=height,
                   cells=cells.reshape(height, width), utime=int(d.get("utime", 0)))


def world_to_cell(grid: OccupancyGrid, x: float, y: float) -> Optional[tuple[int, int]]:
    """Map a world point to (col, row); None when out of bounds."""
    col = math.floor((x - grid.origin_x) / grid.resolution)
    row = math.floor((y - grid.origin_y) / grid.resolution)
    if col < 0 or row < 0 or col >= grid.width or row >= grid.height:
        return None
    return (col, row)


def cell_to_world(grid: OccupancyGrid, col: int, row: int) -> tuple[float, float]:
    """World coordinates of a cell center. Raises on out-of-bounds cells."""
    if col < 0 or row < 0 or col >= grid.width or row >= grid.height:
        raise ValueError(f"cell ({col}, {row}) outside {grid.width}x{grid.height} grid")
    return (grid.origin_x + (col + 0.5) * grid.resolution,
            grid.origin_y + (row + 0.5) * grid.resolution)


@dataclass
class Path2D:
    """Ordered waypoint list."""

    utime: int
    poses: list  # list[Pose2D]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Path2D) and self.utime == other.utime
                and self.poses == other.poses)

    def to_dict(self) -> dict:
        return {"utime": self.utime, "poses": [p.to_dict() for p in self.poses]}

    @classmethod
    def from_dict(cls, d: dict) -> "Path2D":
        return cls(utime=int(d["utime"]),
                   poses=[Pose2D.from_dict(p) for p in d["poses"]])


@dataclass(frozen=True)
class WheelCommand:
    """Wheel angular velocity setpoints, rad/s per motor channel."""

    utime: int
    velocities: tuple

    def to_dict(self) -> dict:
        return {"utime": self.utime, "velocities": list(self.velocities)}

    @classmethod
    def from_dict(cls, d: dict) -> "WheelCommand":
        return cls(utime=int(d["utime"]),
                   velocities=tuple(float(v) for v in d["velocities"]))


@dataclass(frozen=True)
class EncoderReading:
    """Cumulative signed ticks per channel plus time since previous reading."""

    utime: int
    ticks: tuple
    delta_time: int  # microseconds

    def to_dict(self) -> dict:
        return {"utime": self.utime, "ticks": list(self.ticks),
                "delta_time": self.delta_time}

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderReading":
        return cls(utime=int(d["utime"]), ticks=tuple(int(t) for t in d["ticks"]),
                   delta_time=int(d["delta_time"]))


class SlamMode(Enum):
    IDLE = "IDLE"
    LOCALIZATION_ONLY = "LOCALIZATION_ONLY"
    FULL_SLAM = "FULL_SLAM"


@dataclass(frozen=True)
class SlamModeCommand:
    utime: int
    mode: SlamMode

    def to_dict(self) -> dict:
        return {"utime": self.utime, "mode": self.mode.value}

    @classmethod
    def from_dict(cls, d: dict) -> "SlamModeCommand":
        return cls(utime=int(d["utime"]), mode=SlamMode(d["mode"]))


@dataclass(frozen=True)
class SlamResetCommand:
    utime: int

    def to_dict(self) -> dict:
        return {"utime": self.utime}

    @classmethod
    def from_dict(cls, d: dict) -> "SlamResetCommand":
        return cls(utime=int(d["utime"]))


@dataclass(frozen=True)
class PlanRequest:
    """Ask the navigation node to plan from the current pose to a goal."""

    utime: int
    goal: Pose2D
    start: Optional[Pose2D] = None  # None: plan from current SLAM pose

    def to_dict(self) -> dict:
        d = {"utime": self.utime, "goal": self.goal.to_dict()}
        if self.start is not None:
            d["start"] = self.start.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PlanRequest":
        start = Pose2D.from_dict(d["start"]) if "start" in d else None
        return cls(utime=int(d["utime"]), goal=Pose2D.from_dict(d["goal"]), start=start)


# --- map file format -------------------------------------------------------
#
# ASCII. Line 1: "origin_x origin_y width height resolution".
# Then `height` lines of `width` space-separated log-odds ints, row 0 first.

def save_map_text(grid: OccupancyGrid) -> str:
    lines = [f"{grid.origin_x!r} {grid.origin_y!r} {grid.width} {grid.height} "
             f"{grid.resolution!r}"]
    for row in range(grid.height):
        lines.append(" ".join(str(int(v)) for v in grid.cells[row]))
    return "\n".join(lines) + "\n"


def load_map_text(text: str) -> OccupancyGrid:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty map file")
    header = lines[0].split()
    if len(header) != 5:
        raise ValueError(f"bad map header: {lines[0]!r}")
    origin_x, origin_y = float(header[0]), float(header[1])
    width, height = int(header[2]), int(header[3])
    resolution = float(header[4])
    if len(lines) - 1 != height:
        raise ValueError(f"expected {height} rows, found {len(lines) - 1}")
    cells = np.zeros((height, width), dtype=np.int8)
    for r in range(height):
        vals = lines[1 + r].split()
        if len(vals) != width:
            raise ValueError(f"row {r}: expected {width} cells, found {len(vals)}")
        for c, v in enumerate(vals):
            iv = int(v)
            if iv < -128 or iv > 127:
                raise ValueError(f"cell value {iv} outside [-128, 127]")
            cells[r, c] = iv
    return OccupancyGrid(origin_x, origin_y, resolution, width, height, cells)


def save_map_file(grid: OccupancyGrid, path) -> None:
    with open(path, "w") as f:
        f.write(save_map_text(grid))


def load_map_file(path) -> OccupancyGrid:
    with open(path) as f:
        return load_map_text(f.read())


def encode_payload(obj) -> bytes:
    """Bus wire form of any catalog type: compact JSON bytes."""
    return json.dumps(obj.to_dict(), separators=(",", ":")).encode("utf-8")


def decode_payload(cls, data: bytes):
    return cls.from_dict(json.loads(data.decode("utf-8")))
