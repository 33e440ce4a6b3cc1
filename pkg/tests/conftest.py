import dataclasses
import math

import numpy as np
import pytest

from mbot_stack.config import StackConfig
from mbot_stack.sim import make_walled_room
from mbot_stack.types import (
    EncoderReading,
    LidarScan,
    OccupancyGrid,
    Path2D,
    PlanRequest,
    Pose2D,
    SlamMode,
    SlamModeCommand,
    SlamResetCommand,
    Twist2D,
    WheelCommand,
)


@pytest.fixture
def room():
    return make_walled_room(10.0, 0.1)


@pytest.fixture
def fast_config():
    """Default stack config with real-time pacing off."""
    base = StackConfig()
    return dataclasses.replace(base,
                               sim=dataclasses.replace(base.sim, realtime=False))


def random_instance(cls, rng):
    """A randomized value of any catalog payload type."""
    if cls is Pose2D:
        return Pose2D(rng.normal(), rng.normal(), rng.uniform(-math.pi, math.pi),
                      int(rng.integers(0, 2**40)))
    if cls is Twist2D:
        return Twist2D(rng.normal(), rng.normal(), rng.normal(),
                       int(rng.integers(0, 2**40)))
    if cls is LidarScan:
        n = int(rng.integers(1, 40))
        return LidarScan(int(rng.integers(0, 2**40)),
                         rng.uniform(-1, 8, n), rng.uniform(-math.pi, math.pi, n))
    if cls is OccupancyGrid:
        w, h = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        return OccupancyGrid(rng.normal(), rng.normal(), float(rng.uniform(0.01, 1)),
                             w, h, rng.integers(-128, 128, (h, w)).astype(np.int8),
                             int(rng.integers(0, 2**40)))
    if cls is Path2D:
        n = int(rng.integers(0, 6))
        return Path2D(int(rng.integers(0, 2**40)),
                      [random_instance(Pose2D, rng) for _ in range(n)])
    if cls is SlamModeCommand:
        return SlamModeCommand(int(rng.integers(0, 2**40)),
                               rng.choice(list(SlamMode)))
    if cls is SlamResetCommand:
        return SlamResetCommand(int(rng.integers(0, 2**40)))
    if cls is EncoderReading:
        n = int(rng.integers(2, 4))
        return EncoderReading(int(rng.integers(0, 2**40)),
                              tuple(int(v) for v in rng.integers(-10**6, 10**6, n)),
                              int(rng.integers(1, 10**6)))
    if cls is WheelCommand:
        n = int(rng.integers(2, 4))
        return WheelCommand(int(rng.integers(0, 2**40)),
                            tuple(float(v) for v in rng.normal(size=n)))
    if cls is PlanRequest:
        start = random_instance(Pose2D, rng) if rng.random() < 0.5 else None
        return PlanRequest(int(rng.integers(0, 2**40)),
                           random_instance(Pose2D, rng), start)
    raise AssertionError(f"no generator for {cls}")
