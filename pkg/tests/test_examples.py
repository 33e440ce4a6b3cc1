import dataclasses
import math
import socket

import numpy as np
import pytest

from mbot_stack.bridge import BridgeServer
from mbot_stack.client import RobotHandle
from mbot_stack.config import StackConfig
from mbot_stack.examples.bug_navigate import bug_navigate
from mbot_stack.examples.wall_follow import nearest_beam, wall_follow, \
    wall_follow_step
from mbot_stack.sim import make_walled_room
from mbot_stack.stack import SimStack
from mbot_stack.types import LidarScan, save_map_file


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def scan_of(ranges_by_bearing):
    bearings = np.array(sorted(ranges_by_bearing))
    ranges = np.array([ranges_by_bearing[b] for b in bearings])
    return LidarScan(0, ranges, bearings)


class TestControlLaw:
    def test_nearest_beam_skips_invalid(self):
        scan = scan_of({0.0: -1.0, 1.0: 2.0, 2.0: 0.7})
        dist, bearing = nearest_beam(scan)
        assert (dist, bearing) == (0.7, 2.0)

    def test_all_invalid_searches(self):
        scan = scan_of({0.0: -1.0, 1.0: -1.0})
        vx, wz = wall_follow_step(scan, 0.5)
        assert vx == 0.0 and wz > 0

    def test_wall_too_far_searches(self):
        scan = scan_of({0.0: 5.0})
        vx, wz = wall_follow_step(scan, 0.5)
        assert vx == 0.0 and wz > 0

    def test_on_station_drives_straight(self):
        # wall exactly at -pi/2 at the set distance: no correction
        scan = scan_of({-math.pi / 2: 0.5, 0.0: 3.0})
        vx, wz = wall_follow_step(scan, 0.5)
        assert vx > 0 and wz == pytest.approx(0.0)

    def test_too_close_steers_away(self):
        scan = scan_of({-math.pi / 2: 0.3})
        _, wz = wall_follow_step(scan, 0.5)
        assert wz > 0  # turn left, away from the right-hand wall

    def test_wall_ahead_turns_left(self):
        scan = scan_of({0.0: 0.5})
        _, wz = wall_follow_step(scan, 0.5)
        assert wz > 0


def launch(world_file="", start=(5.0, 1.2, 0.0), time_scale=4.0):
    base = StackConfig()
    cfg = dataclasses.replace(
        base,
        world_map=world_file,
        slam_mode="IDLE",  # examples use odometry; keep runs fast and exact
        sim=dataclasses.replace(base.sim, start_x=start[0], start_y=start[1],
                                start_theta=start[2], realtime=True,
                                time_scale=time_scale),
        bridge=dataclasses.replace(base.bridge, host="127.0.0.1",
                                   port=free_port()))
    stack = SimStack(cfg)
    bridge = BridgeServer(stack.bus, host="127.0.0.1", port=cfg.bridge.port)
    bridge.start()
    stack.start()
    return cfg, stack, bridge


class TestWallFollowLive:
    def test_holds_distance_band(self):
        """Start 1.2 m off the south wall; after settling, the nearest-wall
        distance stays in a band around the 0.5 m set distance."""
        cfg, stack, bridge = launch()
        try:
            with RobotHandle(f"ws://127.0.0.1:{cfg.bridge.port}",
                             timeout=5.0) as bot:
                wall_follow(bot, set_distance=0.5, duration=12.0, rate=25.0)
                # measure from ground truth at the end of the run
                pose = stack.world.true_pose
                dist = min(pose.x, pose.y, 10.0 - pose.x, 10.0 - pose.y) - 0.1
                assert 0.2 < dist < 1.0
        finally:
            stack.stop()
            bridge.stop()


class TestBugNavigateLive:
    def test_reaches_clear_goal(self):
        cfg, stack, bridge = launch(start=(3.0, 3.0, 0.0))
        try:
            with RobotHandle(f"ws://127.0.0.1:{cfg.bridge.port}",
                             timeout=5.0) as bot:
                result = bug_navigate(bot, 6.0, 6.0, timeout=60.0, rate=25.0)
                assert result == "reached"
                truth = stack.world.true_pose
                assert math.hypot(truth.x - 6.0, truth.y - 6.0) < 0.4
        finally:
            stack.stop()
            bridge.stop()

    def test_routes_around_obstacle(self, tmp_path):
        """A wall stub between start and goal forces boundary following."""
        world = make_walled_room(10.0, 0.1)
        world.cells[30:70, 50] = 127  # wall x=5.0..5.1, y=3..7
        path = tmp_path / "world.map"
        save_map_file(world, str(path))
        cfg, stack, bridge = launch(world_file=str(path),
                                    start=(3.0, 5.0, 0.0))
        try:
            with RobotHandle(f"ws://127.0.0.1:{cfg.bridge.port}",
                             timeout=5.0) as bot:
                result = bug_navigate(bot, 7.0, 5.0, timeout=120.0, rate=25.0)
                assert result == "reached"
        finally:
            stack.stop()
            bridge.stop()

    def test_enclosed_goal_reported_unreachable(self, tmp_path):
        """Goal inside a closed box: the bug walks the whole boundary and
        reports unreachable instead of looping forever."""
        world = make_walled_room(10.0, 0.1)
        world.cells[40:61, 40] = 127
        world.cells[40:61, 60] = 127
        world.cells[40, 40:61] = 127
        world.cells[60, 40:61] = 127
        path = tmp_path / "world.map"
        save_map_file(world, str(path))
        cfg, stack, bridge = launch(world_file=str(path),
                                    start=(2.0, 5.0, 0.0))
        try:
            with RobotHandle(f"ws://127.0.0.1:{cfg.bridge.port}",
                             timeout=5.0) as bot:
                result = bug_navigate(bot, 5.0, 5.0, timeout=120.0, rate=25.0)
                assert result == "unreachable"
        finally:
            stack.stop()
            bridge.stop()
