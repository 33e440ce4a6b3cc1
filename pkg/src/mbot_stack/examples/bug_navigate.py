"""Bug-style navigation: head for the goal, follow obstacle boundaries
around obstructions, give up after a full boundary loop.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from ..client import RobotHandle
from ..types import wrap_angle
from .wall_follow import wall_follow_step

GOAL_TOLERANCE = 0.2      # m
OBSTRUCTION_RANGE = 0.6   # m; obstacle closer than this ahead blocks the goal line
LOOP_CLOSE_RADIUS = 0.3   # m; returning here after leaving means a closed loop


def _front_clearance(scan, goal_bearing: float, half_width: float = 0.35) -> float:
    """Minimum valid range within +-half_width rad of the goal bearing."""
    rel = np.array([abs(wrap_angle(t - goal_bearing)) for t in scan.thetas])
    mask = (rel <= half_width) & (scan.ranges > 0.0)
    if not np.any(mask):
        return math.inf
    return float(np.min(scan.ranges[mask]))


def bug_navigate(handle: RobotHandle, goal_x: float, goal_y: float,
                 timeout: float = 120.0, rate: float = 10.0) -> str:
    """Returns "reached", "unreachable", or "timeout"."""
    period = 1.0 / rate
    deadline = time.monotonic() + timeout
    following = False
    hit_point = None
    hit_goal_dist = math.inf
    left_hit_point = False
    try:
        while time.monotonic() < deadline:
            pose = handle._read_pose()
            dx, dy = goal_x - pose.x, goal_y - pose.y
            goal_dist = math.hypot(dx, dy)
            if goal_dist <= GOAL_TOLERANCE:
                return "reached"
            scan = handle.read_lidar()
            goal_bearing = wrap_angle(math.atan2(dy, dx) - pose.theta)
            clearance = _front_clearance(scan, goal_bearing)

            if following:
                d_hit = math.hypot(pose.x - hit_point[0], pose.y - hit_point[1])
                if not left_hit_point and d_hit > 2 * LOOP_CLOSE_RADIUS:
                    left_hit_point = True
                if left_hit_point and d_hit < LOOP_CLOSE_RADIUS:
                    return "unreachable"  # walked the whole boundary
                # leave the boundary only with a clear goal line AND net
                # progress past the hit point, else re-hits keep resetting
                # the hit point and a surrounded goal is never detected
                if (clearance > OBSTRUCTION_RANGE
                        and abs(goal_bearing) < math.pi / 2
                        and goal_dist < hit_goal_dist - LOOP_CLOSE_RADIUS):
                    following = False  # goal line is clear again
                else:
                    vx, wz = wall_follow_step(scan, set_distance=0.4)
                    handle.drive(vx, 0.0, wz)
                    time.sleep(period)
                    continue

            if clearance <= OBSTRUCTION_RANGE:
                following = True
                hit_point = (pose.x, pose.y)
                hit_goal_dist = goal_dist
                left_hit_point = False
                continue
            # drive toward the goal
            wz = max(-1.5, min(1.5, 2.0 * goal_bearing))
            vx = 0.3 * max(0.0, math.cos(goal_bearing))
            handle.drive(vx, 0.0, wz)
            time.sleep(period)
        return "timeout"
    finally:
        handle.stop()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Bug navigation to a goal")
    parser.add_argument("--bridge", default="ws://localhost:8765")
    parser.add_argument("--goal", required=True, help="x,y in meters")
    parser.add_argument("--timeout", type=float, default=120.0)
    args = parser.parse_args(argv)
    gx, gy = (float(v) for v in args.goal.split(","))
    with RobotHandle(args.bridge) as handle:
        result = bug_navigate(handle, gx, gy, timeout=args.timeout)
    print(result)
    return 0 if result == "reached" else 1


if __name__ == "__main__":
    raise SystemExit(main())
