"""Canonical channel table: every bus/bridge channel and its payload type."""

from __future__ import annotations

from .types import (
    EncoderReading,
    LidarScan,
    OccupancyGrid,
    Path2D,
    PlanRequest,
    Pose2D,
    SlamModeCommand,
    SlamResetCommand,
    Twist2D,
    WheelCommand,
    decode_payload,
    encode_payload,
)

MBOT_VEL_CMD = "MBOT_VEL_CMD"
ODOMETRY = "ODOMETRY"
LIDAR = "LIDAR"
SLAM_POSE = "SLAM_POSE"
SLAM_MAP = "SLAM_MAP"
CONTROLLER_PATH = "CONTROLLER_PATH"
SLAM_MODE = "SLAM_MODE"
SLAM_RESET = "SLAM_RESET"
MBOT_ENCODERS = "MBOT_ENCODERS"
MBOT_MOTOR_CMD = "MBOT_MOTOR_CMD"
PLAN_REQUEST = "PLAN_REQUEST"
PLAN_RESPONSE = "PLAN_RESPONSE"
SLAM_STATUS = "SLAM_STATUS"  # stack feedback: currently active SLAM mode

CHANNEL_TYPES = {
    MBOT_VEL_CMD: Twist2D,
    ODOMETRY: Pose2D,
    LIDAR: LidarScan,
    SLAM_POSE: Pose2D,
    SLAM_MAP: OccupancyGrid,
    CONTROLLER_PATH: Path2D,
    SLAM_MODE: SlamModeCommand,
    SLAM_RESET: SlamResetCommand,
    MBOT_ENCODERS: EncoderReading,
    MBOT_MOTOR_CMD: WheelCommand,
    PLAN_REQUEST: PlanRequest,
    PLAN_RESPONSE: Path2D,
    SLAM_STATUS: SlamModeCommand,
}


class UnknownChannelError(KeyError):
    pass


def channel_type(channel: str):
    try:
        return CHANNEL_TYPES[channel]
    except KeyError:
        raise UnknownChannelError(channel) from None


def encode(channel: str, obj) -> bytes:
    cls = channel_type(channel)
    if not isinstance(obj, cls):
        raise TypeError(f"channel {channel} carries {cls.__name__}, "
                        f"got {type(obj).__name__}")
    return encode_payload(obj)


def decode(channel: str, data: bytes):
    return decode_payload(channel_type(channel), data)
