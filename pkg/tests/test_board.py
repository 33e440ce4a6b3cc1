import math

import numpy as np
import pytest

from mbot_stack.board import (
    ControlBoard,
    DriveConfig,
    DriveError,
    dead_reckon,
    forward_kinematics,
    inverse_kinematics,
)
from mbot_stack.types import EncoderReading, Pose2D, Twist2D, WheelCommand, wrap_angle

DIFF = DriveConfig(drive_type="differential", wheel_radius=0.05, base_radius=0.10)
OMNI = DriveConfig(drive_type="omni3", wheel_radius=0.05, base_radius=0.10)


class TestKinematics:
    def test_zero_twist_zero_wheels(self):
        cmd = inverse_kinematics(DIFF, Twist2D())
        assert cmd.velocities == (0.0, 0.0)

    def test_differential_example(self):
        # r=0.05, b=0.10: wL=(0.375-0.125)/0.05=5, wR=(0.375+0.125)/0.05=10
        cmd = inverse_kinematics(DIFF, Twist2D(vx=0.375, wz=1.25))
        assert cmd.velocities == pytest.approx((5.0, 10.0))
        back = forward_kinematics(DIFF, cmd.velocities)
        assert (back.vx, back.wz) == pytest.approx((0.375, 1.25))

    def test_omni_pure_rotation_symmetry(self):
        cmd = inverse_kinematics(OMNI, Twist2D(wz=2.0))
        expected = OMNI.base_radius * 2.0 / OMNI.wheel_radius
        assert cmd.velocities == pytest.approx((expected,) * 3)

    def test_differential_vy_rejected(self):
        with pytest.raises(DriveError):
            inverse_kinematics(DIFF, Twist2D(vx=0.1, vy=0.1))

    def test_non_finite_rejected(self):
        with pytest.raises(DriveError):
            inverse_kinematics(DIFF, Twist2D(vx=float("nan")))

    def test_wheel_count_mismatch_rejected(self):
        with pytest.raises(DriveError):
            forward_kinematics(DIFF, (1.0, 2.0, 3.0))
        with pytest.raises(DriveError):
            forward_kinematics(OMNI, (1.0, 2.0))

    def test_straight_drive(self):
        tw = forward_kinematics(DIFF, (10.0, 10.0))
        assert (tw.vx, tw.vy, tw.wz) == pytest.approx((0.5, 0.0, 0.0))

    def test_pure_spin(self):
        tw = forward_kinematics(DIFF, (-10.0, 10.0))
        assert tw.vx == pytest.approx(0.0)
        assert tw.wz == pytest.approx(10.0 * 0.05 / 0.10)

    @pytest.mark.parametrize("cfg", [DIFF, OMNI], ids=["differential", "omni3"])
    def test_forward_inverse_identity(self, cfg):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            vy = 0.0 if cfg.drive_type == "differential" else rng.uniform(-0.5, 0.5)
            tw = Twist2D(vx=rng.uniform(-0.5, 0.5), vy=vy,
                         wz=rng.uniform(-2, 2))
            back = forward_kinematics(cfg, inverse_kinematics(cfg, tw).velocities)
            assert abs(back.vx - tw.vx) < 1e-9
            assert abs(back.vy - tw.vy) < 1e-9
            assert abs(back.wz - tw.wz) < 1e-9

    def test_saturation_preserves_direction(self):
        tw = Twist2D(vx=10.0, wz=5.0)  # far beyond wheel limits
        cmd = inverse_kinematics(DIFF, tw)
        assert max(abs(v) for v in cmd.velocities) == pytest.approx(
            DIFF.max_wheel_speed)
        back = forward_kinematics(DIFF, cmd.velocities)
        # same twist direction, scaled down
        assert back.vx / tw.vx == pytest.approx(back.wz / tw.wz)


class TestBoardDynamics:
    def test_zero_setpoint_zero_ticks(self):
        board = ControlBoard(DIFF)
        reading = board.step(0.1)
        assert reading.ticks == (0, 0)

    def test_one_ideal_revolution(self):
        cfg = DriveConfig(encoder_resolution=48, motor_time_constant=0.0)
        board = ControlBoard(cfg)
        board.set_wheel_command(WheelCommand(0, (2 * math.pi, 2 * math.pi)))
        reading = board.step(1.0)
        assert reading.ticks == (48, 48)

    def test_first_order_step_response(self):
        # after one time constant the velocity reaches 1 - 1/e of setpoint
        cfg = DriveConfig(motor_time_constant=0.05)
        board = ControlBoard(cfg)
        board.set_wheel_command(WheelCommand(0, (10.0, 10.0)))
        board.step(0.05)
        expected = 10.0 * (1 - math.exp(-1))
        assert board.wheels[0].velocity == pytest.approx(expected)

    def test_setpoint_saturates(self):
        board = ControlBoard(DIFF)
        board.set_wheel_command(WheelCommand(0, (1e6, -1e6)))
        assert board.setpoints == [DIFF.max_wheel_speed, -DIFF.max_wheel_speed]

    def test_invalid_twist_counts_error(self):
        board = ControlBoard(DIFF)
        board.set_twist_command(Twist2D(vx=0.1, vy=0.1))
        assert board.command_errors == 1
        assert board.setpoints == [0.0, 0.0]

    def test_noise_deterministic_per_seed(self):
        readings = []
        for _ in range(2):
            board = ControlBoard(DIFF, seed=7, encoder_noise_sigma=0.05)
            board.set_wheel_command(WheelCommand(0, (10.0, 10.0)))
            readings.append([board.step(0.02).ticks for _ in range(50)])
        assert readings[0] == readings[1]


class TestDeadReckoning:
    def test_zero_delta_identity(self):
        pose = Pose2D(1.0, 2.0, 0.5, 0)
        out = dead_reckon(DIFF, pose, EncoderReading(10, (0, 0), 10))
        assert (out.x, out.y, out.theta) == (pose.x, pose.y, pose.theta)

    def test_straight_line(self):
        # equal ticks: distance = 2*pi*ticks/resolution * wheel_radius
        ticks = 480  # one full revolution at default resolution
        out = dead_reckon(DIFF, Pose2D(), EncoderReading(10**6, (ticks, ticks), 10**6))
        assert out.x == pytest.approx(2 * math.pi * 0.05)
        assert out.y == pytest.approx(0.0)
        assert out.theta == pytest.approx(0.0)

    def test_delta_time_rejected(self):
        with pytest.raises(ValueError):
            dead_reckon(DIFF, Pose2D(), EncoderReading(0, (1, 1), 0))

    def _fine_integration(self, cfg, wl, wr, duration, substeps):
        """Independent oracle: integrate the unicycle model at tiny steps."""
        x = y = theta = 0.0
        dt = duration / substeps
        vx = cfg.wheel_radius * (wl + wr) / 2
        wz = cfg.wheel_radius * (wr - wl) / (2 * cfg.base_radius)
        for _ in range(substeps):
            x += vx * math.cos(theta) * dt
            y += vx * math.sin(theta) * dt
            theta += wz * dt
        return x, y, wrap_angle(theta)

    def test_quarter_circle_matches_fine_integrator(self):
        # arc: constant wheel speeds turning 90 degrees over 2 s
        wl, wr = 4.0, 6.0
        duration = 2.0
        cfg = DriveConfig(wheel_radius=0.05, base_radius=0.10,
                          encoder_resolution=10000)
        ox, oy, otheta = self._fine_integration(cfg, wl, wr, duration, 10**4)
        # dead-reckon the same motion in 100 encoder chunks
        pose = Pose2D()
        steps = 100
        dt_us = round(duration / steps * 1e6)
        prev = (0.0, 0.0)
        for i in range(1, steps + 1):
            t = duration * i / steps
            angles = (wl * t, wr * t)
            ticks = tuple(round((a - p) / (2 * math.pi) * cfg.encoder_resolution)
                          for a, p in zip(angles, prev))
            prev = tuple(p + t2 * 2 * math.pi / cfg.encoder_resolution
                         for p, t2 in zip(prev, ticks))
            pose = dead_reckon(cfg, pose, EncoderReading(i * dt_us, ticks, dt_us))
        assert math.hypot(pose.x - ox, pose.y - oy) < 1e-3
        assert abs(wrap_angle(pose.theta - otheta)) < 1e-3

    def test_closed_loop_returns_to_start(self):
        """Ideal drive around a square returns to the start pose."""
        cfg = DriveConfig(motor_time_constant=0.0, encoder_resolution=10**6)
        board = ControlBoard(cfg)
        dt = 0.001
        for _ in range(4):
            board.set_twist_command(Twist2D(vx=0.25))
            for _ in range(1000):  # 0.25 m forward
                board.step(dt)
            board.set_twist_command(Twist2D(wz=math.pi / 2))
            for _ in range(1000):  # 90 degree turn
                board.step(dt)
        pose = board.odom
        assert math.hypot(pose.x, pose.y) < 1e-3
        assert abs(wrap_angle(pose.theta)) < 1e-3
