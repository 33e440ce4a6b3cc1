"""Wall following using min-range beam steering.

Keeps the nearest wall on the robot's right at a set distance. With no
wall within detection range the robot rotates in place to search.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from ..client import RobotHandle
from ..types import wrap_angle

WALL_DETECT_RANGE = 2.0  # m; beyond this the wall is considered lost


def nearest_beam(scan):
    """(range, bearing) of the closest valid beam, or (None, None)."""
    valid = scan.ranges > 0.0
    if not np.any(valid):
        return None, None
    idx = np.flatnonzero(valid)
    k = idx[np.argmin(scan.ranges[idx])]
    return float(scan.ranges[k]), float(scan.thetas[k])


def wall_follow_step(scan, set_distance: float, speed: float = 0.3,
                     bearing_gain: float = 1.5, distance_gain: float = 1.5):
    """One control decision from one scan: returns (vx, wz)."""
    dist, bearing = nearest_beam(scan)
    if dist is None or dist > WALL_DETECT_RANGE:
        return 0.0, 0.8  # lost the wall: rotate-in-place search
    # wall belongs at bearing -pi/2 (robot's right) at set_distance
    bearing_err = wrap_angle(bearing + math.pi / 2.0)
    wz = bearing_gain * bearing_err - distance_gain * (dist - set_distance)
    wz = max(-1.5, min(1.5, wz))
    return speed, wz


def wall_follow(handle: RobotHandle, set_distance: float = 0.5,
                duration: float = 60.0, rate: float = 10.0) -> None:
    period = 1.0 / rate
    end = time.monotonic() + duration
    try:
        while time.monotonic() < end:
            scan = handle.read_lidar()
            vx, wz = wall_follow_step(scan, set_distance)
            handle.drive(vx, 0.0, wz)
            time.sleep(period)
    finally:
        handle.stop()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Follow the nearest wall")
    parser.add_argument("--bridge", default="ws://localhost:8765")
    parser.add_argument("--duration", type=float, default=60.0)
    parser.add_argument("--distance", type=float, default=0.5)
    args = parser.parse_args(argv)
    with RobotHandle(args.bridge) as handle:
        wall_follow(handle, set_distance=args.distance, duration=args.duration)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
