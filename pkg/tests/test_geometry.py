import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from proxysync.errors import BadTileIndex, EmptyRoomSet, NonCardinalRotation
from proxysync.geometry import (Pose2, Rect, RigidTransform2, RoomConfig, SharedWorkspace, Vec2,
                                clamp_to_workspace, localize_room, normalize_angle, shared_workspace,
                                tile_center, tile_of, transformed_extents, world_transform)

from conftest import close

finite = st.floats(-10, 10, allow_nan=False)
seats = st.sampled_from([-math.pi / 2, 0.0, math.pi / 2, math.pi])
extent = st.floats(0.05, 2.0)


def test_normalize_angle_half_open_interval():
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(math.pi) == pytest.approx(math.pi)
    assert normalize_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_pose_heading_is_normalized():
    assert Pose2.at(0, 0, 2 * math.pi).heading == pytest.approx(0.0)


def test_rect_rejects_non_positive():
    with pytest.raises(ValueError):
        Rect(0.0, 0.3)


class TestLocalizeRoom:
    def test_south_seat_is_identity(self):
        t = localize_room(RoomConfig(1, Rect(0.6, 0.4), -math.pi / 2))
        assert t.rotation == pytest.approx(0.0)
        assert t.translation == (0.0, 0.0)

    def test_east_seat_quarter_turn(self):
        t = localize_room(RoomConfig(2, Rect(0.5, 0.35), 0.0))
        assert t.rotation == pytest.approx(-math.pi / 2)
        assert t.translation == (0.0, 0.0)

    def test_west_seat_normalizes(self):
        t = localize_room(RoomConfig(2, Rect(0.5, 0.35), math.pi))
        assert t.rotation == pytest.approx(math.pi / 2)

    @given(seats)
    def test_every_seat_maps_to_south(self, seat):
        t = localize_room(RoomConfig(1, Rect(0.5, 0.4), seat))
        assert normalize_angle(seat + t.rotation) == pytest.approx(-math.pi / 2, abs=1e-9)

    @given(seats, seats)
    def test_partners_render_opposite(self, a, b):
        ta = world_transform(RoomConfig(1, Rect(0.5, 0.4), a))
        tb = world_transform(RoomConfig(2, Rect(0.5, 0.4), b), opposite=True)
        diff = normalize_angle((b + tb.rotation) - (a + ta.rotation))
        assert abs(diff) == pytest.approx(math.pi, abs=1e-9)


class TestTransformedExtents:
    def test_identity(self):
        assert transformed_extents(Rect(0.6, 0.4), RigidTransform2(0.0)) == Rect(0.6, 0.4)

    def test_quarter_turn_swaps(self):
        assert transformed_extents(Rect(0.5, 0.35), RigidTransform2(-math.pi / 2)) == Rect(0.35, 0.5)

    def test_half_turn(self):
        assert transformed_extents(Rect(0.6, 0.4), RigidTransform2(math.pi)) == Rect(0.6, 0.4)

    def test_non_cardinal_rejected(self):
        with pytest.raises(NonCardinalRotation):
            transformed_extents(Rect(0.6, 0.4), RigidTransform2(0.3))


class TestSharedWorkspace:
    def test_single_room(self):
        ws = shared_workspace([RoomConfig(1, Rect(0.6, 0.4), -math.pi / 2)])
        assert ws.bounds == Rect(0.6, 0.4)

    def test_perpendicular_rooms(self, demo_rooms):
        assert shared_workspace(demo_rooms).bounds == Rect(0.35, 0.4)

    def test_identical_opposite_rooms(self):
        rooms = [RoomConfig(1, Rect(0.5, 0.3), -math.pi / 2), RoomConfig(2, Rect(0.5, 0.3), math.pi / 2)]
        assert shared_workspace(rooms).bounds == Rect(0.5, 0.3)

    def test_empty(self):
        with pytest.raises(EmptyRoomSet):
            shared_workspace([])

    @given(st.lists(st.tuples(extent, extent, seats), min_size=1, max_size=4))
    def test_containment(self, specs):
        rooms = [RoomConfig(i, Rect(w, d), s) for i, (w, d, s) in enumerate(specs)]
        ws = shared_workspace(rooms)
        for room in rooms:
            back = localize_room(room).inverse()
            for corner in ws.bounds.corners():
                assert room.table.contains(back.apply(corner), tol=1e-9)


class TestClamp:
    ws = SharedWorkspace(Rect(0.35, 0.4))

    def test_interior(self):
        assert clamp_to_workspace(Vec2(0, 0), self.ws) == (0, 0)

    def test_single_axis(self):
        assert clamp_to_workspace(Vec2(0.5, 0.1), self.ws) == (0.35, 0.1)

    def test_corner(self):
        assert clamp_to_workspace(Vec2(-1, -1), self.ws) == (-0.35, -0.4)

    @given(finite, finite)
    def test_idempotent(self, x, y):
        once = clamp_to_workspace(Vec2(x, y), self.ws)
        assert clamp_to_workspace(once, self.ws) == once
        assert self.ws.bounds.contains(once)


class TestTiles:
    ws = SharedWorkspace(Rect(0.35, 0.4))

    def test_center(self):
        assert tile_of(Vec2(0, 0), self.ws) == 5

    def test_far_center(self):
        assert tile_of(Vec2(0, 0.4 - 1e-6), self.ws) == 2

    def test_near_left(self):
        assert tile_of(Vec2(-0.35 + 1e-6, -0.4 + 1e-6), self.ws) == 7

    def test_edges_stay_on_grid(self):
        assert tile_of(Vec2(0.35, 0.4), self.ws) == 3
        assert tile_of(Vec2(-0.35, -0.4), self.ws) == 7

    def test_centers(self, ws_small):
        assert tile_center(5, ws_small) == (0, 0)
        assert close(tile_center(2, ws_small), (0.0, 0.2))
        assert close(tile_center(9, ws_small), (0.3, -0.2))

    @pytest.mark.parametrize("bad", [0, 10, -1])
    def test_bad_index(self, bad):
        with pytest.raises(BadTileIndex):
            tile_center(bad, self.ws)

    @given(extent, extent)
    def test_round_trip(self, w, d):
        ws = SharedWorkspace(Rect(w, d))
        assert [tile_of(tile_center(i, ws), ws) for i in range(1, 10)] == list(range(1, 10))


@given(st.floats(-math.pi, math.pi), finite, finite, finite, finite)
def test_transform_round_trip(rot, tx, ty, px, py):
    t = RigidTransform2(rot, Vec2(tx, ty))
    assert close(t.apply(t.inverse().apply(Vec2(px, py))), (px, py), 1e-9)
    ident = t.compose(t.inverse())
    assert abs(normalize_angle(ident.rotation)) < 1e-9
    assert close(ident.translation, (0, 0), 1e-9)
