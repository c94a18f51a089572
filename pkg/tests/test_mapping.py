import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxysync.errors import EmptyPool, MissingRoomProxy, OracleTooLarge, UnboundObject
from proxysync.geometry import Pose2, Rect, RigidTransform2, RoomConfig, Vec2, localize_room
from proxysync.mapping import (Binding, BindingState, DemandPoint, ManyToOne, OneToMany, OneToOne, StickySelector,
                               binding_state, bound_target, dispatch_one_to_many, makespan, many_to_one_targets,
                               one_to_one_target, optimal_assignment, validate_policies)

from conftest import close

SOUTH = RoomConfig(1, Rect(0.6, 0.4), -math.pi / 2)
EAST = RoomConfig(2, Rect(0.5, 0.35), 0.0)
ws_pt = st.tuples(st.floats(-0.35, 0.35), st.floats(-0.4, 0.4)).map(lambda p: Vec2(*p))
pt = st.tuples(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4)).map(lambda p: Vec2(*p))


class TestOneToOne:
    def test_identity_room(self):
        assert close(one_to_one_target(Pose2.at(0.1, 0.2), SOUTH), (0.1, 0.2))

    def test_east_seat_uses_inverse_localization(self):
        got = one_to_one_target(Pose2.at(0.1, 0.2), EAST)
        assert close(got, (-0.2, 0.1))
        # mapping back with the forward localization recovers the shared point
        assert close(localize_room(EAST).apply(got), (0.1, 0.2))

    def test_clamped_to_table(self):
        assert close(one_to_one_target(Pose2.at(2.0, -2.0), SOUTH), (0.6, -0.4))

    def test_unbound(self):
        with pytest.raises(UnboundObject):
            bound_target(OneToOne({"mug": 1}), "cup", Pose2.at(0, 0), SOUTH)


class TestManyToOne:
    def test_two_identity_rooms(self):
        rooms = [SOUTH, RoomConfig(2, Rect(0.6, 0.4), -math.pi / 2)]
        assert all(close(v, (0, 0)) for v in many_to_one_targets(Pose2.at(0, 0), rooms).values())

    def test_perpendicular_rooms(self):
        got = many_to_one_targets(Pose2.at(0.1, 0), [SOUTH, EAST])
        assert close(got[1], (0.1, 0))
        assert close(got[2], (0.0, 0.1))

    def test_missing_proxy(self):
        with pytest.raises(MissingRoomProxy):
            many_to_one_targets(Pose2.at(0, 0), [SOUTH, EAST], {1: 10})

    @given(ws_pt, ws_pt, st.floats(0, 1))
    def test_segment_images_are_rigid(self, a, b, s):
        p = a + (b - a).scale(s)
        got = {k: many_to_one_targets(Pose2(q), [SOUTH, EAST]) for k, q in (("a", a), ("b", b), ("p", p))}
        for room in (1, 2):
            ta, tb, tp = got["a"][room], got["b"][room], got["p"][room]
            assert close(tp, ta + (tb - ta).scale(s), 1e-9)
            assert ta.dist(tb) == pytest.approx(a.dist(b), abs=1e-9)


class TestDispatch:
    def test_nearest_proxy(self):
        out, queued = dispatch_one_to_many([DemandPoint("a", Vec2(0.25, 0.1))], {1: Vec2(-0.2, 0), 2: Vec2(0.3, 0)})
        assert [b.proxy_id for b in out] == [2]
        assert queued == []

    def test_tie_goes_to_lower_id(self):
        out, _ = dispatch_one_to_many([DemandPoint("a", Vec2(0, 0))], {2: Vec2(0.1, 0), 1: Vec2(-0.1, 0)})
        assert out[0].proxy_id == 1

    def test_hysteresis_retains(self):
        pool = {1: Vec2(0.2, 0), 2: Vec2(0, 0.17)}
        out, _ = dispatch_one_to_many([DemandPoint("a", Vec2(0, 0))], pool, [Binding("a", 1)], margin=0.05)
        assert out[0].proxy_id == 1

    def test_switch_beyond_margin(self):
        pool = {1: Vec2(0.3, 0), 2: Vec2(0, 0.1)}
        out, _ = dispatch_one_to_many([DemandPoint("a", Vec2(0, 0))], pool, [Binding("a", 1)], margin=0.05)
        assert out[0].proxy_id == 2

    def test_queue_when_oversubscribed(self):
        demands = [DemandPoint(k, Vec2(i * 0.1, 0)) for i, k in enumerate("abc")]
        out, queued = dispatch_one_to_many(demands, {1: Vec2(0, 0)})
        assert [b.object_id for b in out] == ["a"]
        assert queued == ["b", "c"]

    def test_empty_pool(self):
        with pytest.raises(EmptyPool):
            dispatch_one_to_many([DemandPoint("a", Vec2(0, 0))], {})

    @settings(max_examples=200, deadline=None)
    @given(st.lists(pt, min_size=1, max_size=4), st.lists(pt, min_size=1, max_size=4))
    def test_exclusive_and_stable(self, proxies, points):
        pool = dict(enumerate(proxies, 1))
        demands = [DemandPoint(f"o{i}", p) for i, p in enumerate(points)]
        first, queued = dispatch_one_to_many(demands, pool)
        assert len({b.proxy_id for b in first}) == len(first)
        assert len({b.object_id for b in first}) == len(first)
        assert len(first) + len(queued) == len(demands)
        again, _ = dispatch_one_to_many(demands, pool, first)
        assert [(b.object_id, b.proxy_id) for b in again] == [(b.object_id, b.proxy_id) for b in first]


class TestOracle:
    def test_single(self):
        out, cost = optimal_assignment([DemandPoint("a", Vec2(0.1, 0))], {7: Vec2(0, 0)})
        assert [b.proxy_id for b in out] == [7]
        assert cost == pytest.approx(0.1)

    def test_identity_pairing(self):
        demands = [DemandPoint("a", Vec2(0, 0)), DemandPoint("b", Vec2(0.4, 0))]
        pool = {1: Vec2(0.05, 0), 2: Vec2(0.5, 0)}
        out, cost = optimal_assignment(demands, pool)
        assert [(b.object_id, b.proxy_id) for b in out] == [("a", 1), ("b", 2)]
        assert cost == pytest.approx(0.1)
        crossed = [Binding("a", 2), Binding("b", 1)]
        assert makespan(crossed, demands, pool) == pytest.approx(0.5)

    def test_coincident(self):
        demands = [DemandPoint("a", Vec2(0.1, 0.1)), DemandPoint("b", Vec2(-0.1, 0))]
        _, cost = optimal_assignment(demands, {1: Vec2(-0.1, 0), 2: Vec2(0.1, 0.1)})
        assert cost == 0.0

    def test_too_large(self):
        pool = {i: Vec2(i * 0.01, 0) for i in range(7)}
        with pytest.raises(OracleTooLarge) as exc:
            optimal_assignment([DemandPoint("a", Vec2(0, 0))], pool)
        assert exc.value.bound == 6

    def test_greedy_within_twice_optimal(self):
        rng = random.Random(3)
        for _ in range(500):
            n = rng.randint(1, 4)
            pool = {i: Vec2(rng.uniform(-.4, .4), rng.uniform(-.4, .4)) for i in range(1, n + 1)}
            demands = [DemandPoint(f"o{i}", Vec2(rng.uniform(-.4, .4), rng.uniform(-.4, .4)))
                       for i in range(rng.randint(1, n))]
            got, _ = dispatch_one_to_many(demands, pool)
            _, best = optimal_assignment(demands, pool)
            assert makespan(got, demands, pool) <= 2 * best + 1e-12


    @settings(max_examples=300, deadline=None)
    @given(st.lists(pt, min_size=1, max_size=4), st.lists(pt, min_size=1, max_size=4), st.randoms())
    def test_stale_bindings_stay_within_twice_optimal(self, proxies, points, rnd):
        pool = dict(enumerate(proxies, 1))
        demands = [DemandPoint(f"o{i}", p) for i, p in enumerate(points[:len(pool)])]
        ids = rnd.sample(sorted(pool), len(demands))
        current = [Binding(d.object_id, pid) for d, pid in zip(demands, ids)]
        got, _ = dispatch_one_to_many(demands, pool, current)
        _, best = optimal_assignment(demands, pool)
        assert makespan(got, demands, pool) <= 2 * best + 1e-12


class TestBindingState:
    def test_at_target(self):
        assert binding_state(Binding("a", 1), Vec2(0, 0), Vec2(0, 0), 0.01) is BindingState.ENGAGED

    def test_far(self):
        assert binding_state(Binding("a", 1), Vec2(0.3, 0), Vec2(0, 0), 0.01) is BindingState.PENDING

    def test_boundary_is_engaged(self):
        assert binding_state(Binding("a", 1), Vec2(0.5, 0), Vec2(0.0, 0), 0.5) is BindingState.ENGAGED


def test_policies_reject_shared_proxy():
    with pytest.raises(ValueError):
        validate_policies([OneToOne({"mug": 1}), OneToMany(frozenset({"b"}), (1, 2))])


def test_policies_accept_disjoint():
    validate_policies([OneToOne({"mug": 1}), ManyToOne("ctl", {1: 2, 2: 3}), OneToMany(frozenset({"b"}), (4,))])


def test_sticky_selector_hysteresis():
    sel = StickySelector(margin=0.05)
    cands = {"house": Vec2(0, 0), "tower": Vec2(0.2, 0)}
    assert sel.choose(Vec2(0.09, 0), cands) == "house"
    assert sel.choose(Vec2(0.12, 0), cands) == "house"
    assert sel.choose(Vec2(0.2, 0), cands) == "tower"
