import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbot_stack import channels
from mbot_stack.types import (
    OccupancyGrid,
    cell_to_world,
    load_map_text,
    save_map_text,
    world_to_cell,
    wrap_angle,
)

from conftest import random_instance

finite_angles = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)


class TestWrapAngle:
    def test_identity_at_zero(self):
        assert wrap_angle(0.0) == 0.0

    def test_single_wrap(self):
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_boundary_convention(self):
        # interval is (-pi, pi]: -pi maps to +pi
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(math.pi) == pytest.approx(math.pi)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            wrap_angle(float("nan"))
        with pytest.raises(ValueError):
            wrap_angle(float("inf"))

    @given(finite_angles)
    def test_in_interval_and_congruent(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        # congruent mod 2pi (tolerance scales with |a| for large inputs)
        k = (a - w) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-6

    @given(finite_angles)
    def test_idempotent(self, a):
        w = wrap_angle(a)
        assert wrap_angle(w) == pytest.approx(w, abs=1e-12)


class TestGridMath:
    def grid(self, origin=(0.0, 0.0), res=0.05, size=(10, 10)):
        return OccupancyGrid.blank(origin[0], origin[1], res, size[0], size[1])

    def test_origin_cell(self):
        assert world_to_cell(self.grid(), 0.0, 0.0) == (0, 0)

    def test_floor_division(self):
        # hand oracle: floor(0.26/0.05)=5, floor(0.05/0.05)=1
        assert world_to_cell(self.grid(), 0.26, 0.05) == (5, 1)

    def test_out_of_bounds_signaled(self):
        assert world_to_cell(self.grid(), -0.01, 0.0) is None
        assert world_to_cell(self.grid(), 0.0, 0.5) is None

    def test_cell_center(self):
        assert cell_to_world(self.grid(), 0, 0) == pytest.approx((0.025, 0.025))

    def test_cell_center_offset_origin(self):
        g = self.grid(origin=(-5.0, -5.0), res=1.0, size=(20, 20))
        assert cell_to_world(g, 5, 5) == pytest.approx((0.5, 0.5))

    def test_out_of_bounds_cell_rejected(self):
        with pytest.raises(ValueError):
            cell_to_world(self.grid(), 10, 0)

    @given(st.floats(0, 0.499), st.floats(0, 0.499))
    def test_round_trip_lands_in_same_cell(self, x, y):
        g = self.grid()
        cell = world_to_cell(g, x, y)
        assert cell is not None
        cx, cy = cell_to_world(g, *cell)
        assert world_to_cell(g, cx, cy) == cell


class TestSerialization:
    @pytest.mark.parametrize("channel", sorted(channels.CHANNEL_TYPES))
    def test_round_trip_bit_exact(self, channel):
        rng = np.random.default_rng(hash(channel) % 2**32)
        cls = channels.channel_type(channel)
        for _ in range(50):
            obj = random_instance(cls, rng)
            data = channels.encode(channel, obj)
            assert channels.decode(channel, data) == obj

    def test_wrong_type_rejected(self):
        from mbot_stack.types import Twist2D
        with pytest.raises(TypeError):
            channels.encode(channels.ODOMETRY, Twist2D())

    def test_unknown_channel_rejected(self):
        with pytest.raises(channels.UnknownChannelError):
            channels.channel_type("NOT_A_CHANNEL")


class TestMapFile:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            grid = random_instance(OccupancyGrid, rng)
            grid.utime = 0  # the file format does not carry timestamps
            parsed = load_map_text(save_map_text(grid))
            assert parsed == grid

    def test_emit_parse_emit_identical(self):
        rng = np.random.default_rng(1)
        grid = random_instance(OccupancyGrid, rng)
        grid.utime = 0
        text = save_map_text(grid)
        assert save_map_text(load_map_text(text)) == text

    def test_header_layout(self):
        grid = OccupancyGrid.blank(1.5, -2.0, 0.05, 3, 2)
        grid.cells[1, 2] = -7
        lines = save_map_text(grid).splitlines()
        assert lines[0].split() == ["1.5", "-2.0", "3", "2", "0.05"]
        assert lines[1] == "0 0 0"
        assert lines[2] == "0 0 -7"

    def test_bad_inputs_rejected(self):
        with pytest.raises(ValueError):
            load_map_text("")
        with pytest.raises(ValueError):
            load_map_text("0 0 2 1 0.1\n1 2 3\n")  # wrong row width
        with pytest.raises(ValueError):
            load_map_text("0 0 1 1 0.1\n200\n")  # out of int8 range
