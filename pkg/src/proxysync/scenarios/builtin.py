"""Seeded scripts for the four demo applications.

Default geometry: room 1 has a 1.2 x 0.8 m table with the user at the south
edge; room 2 has a 1.0 x 0.7 m table with the user at the east edge. Their
shared workspace is 0.7 x 0.8 m, split into the usual 3x3 tiles.
"""

from __future__ import annotations

import math
import random

from ..gesture import GestureConfig
from ..geometry import Pose2, Rect, RoomConfig, Vec2, seat_position, shared_workspace, tile_center, world_transform
from ..sync import ChannelModel
from .game import Outcome, TicTacToeBoard, ttt_apply, ttt_winner
from .script import (SCENARIO_NAMES, MapDecl, ObjectDecl, ProxyDecl, ScenarioScript, TimelineEvent,
                     UserDecl)

DEFAULT_ROOMS = (
    RoomConfig(1, Rect(0.6, 0.4), -math.pi / 2),
    RoomConfig(2, Rect(0.5, 0.35), 0.0),
)
DEFAULT_DELAY = 1.0
GESTURE_STROKE = 0.15

# target tile -> (start tile, command, lateral sign for slides)
MUG_FIXTURES = {
    1: (4, "push", 0),
    2: (5, "push", 0),
    3: (6, "push", 0),
    4: (5, "slide", -1),
    5: (4, "slide", 1),
    6: (5, "slide", 1),
    7: (8, "slide", -1),
    8: (5, "pull", 0),
    9: (8, "slide", 1),
}


def room_local(room: RoomConfig, world, first: bool) -> Vec2:
    return room.table.clamp(world_transform(room, opposite=not first).inverse().apply(world))


def _proxy_at(pid: int, room: RoomConfig, world, heading: float, first: bool) -> ProxyDecl:
    p = room_local(room, world, first)
    return ProxyDecl(pid, room.room_id, Pose2(p, heading))


def _ev(t: float, kind: str, user: int, **fields) -> TimelineEvent:
    return TimelineEvent(round(t, 6), kind, user, fields)


def _channel(seed: int, drop: float) -> ChannelModel:
    return ChannelModel(0.05, 0.02, drop, seed)


def pass_the_mug(seed: int = 0, delay: float = DEFAULT_DELAY, target_tile: int | None = None) -> ScenarioScript:
    """User 1 moves a virtual mug one tile with a palm gesture; both rooms proxy it."""
    rng = random.Random(seed)
    target = target_tile if target_tile is not None else seed % 9 + 1
    start, command, side = MUG_FIXTURES[target]
    ws = shared_workspace(DEFAULT_ROOMS)
    mug = tile_center(start, ws)
    user_seat = seat_position(ws)
    r1, r2 = DEFAULT_ROOMS
    wrist = Vec2(0.0, -0.45)
    t_aim = 0.1 + rng.uniform(0.0, 0.1)
    t_move = t_aim + 0.6 + rng.uniform(0.0, 0.1)
    dur = rng.uniform(0.3, 0.4)
    stroke = GESTURE_STROKE * rng.uniform(1.0, 1.2)
    if command == "slide":
        d = Vec2(float(side), 0.0)
    else:
        d = (mug - user_seat).normalized()
        if command == "pull":
            d = -d
    end = wrist + d.scale(stroke)
    timeline = [
        _ev(t_aim, "aim", 1, object="mug"),
        _ev(t_move, "hand", 1, x=end.x, y=end.y, dur=dur),
        _ev(t_move + dur + 0.05, "aim", 1, off=True),
    ]
    duration = round(t_move + dur + 1.0 + delay + 0.4, 2)
    return ScenarioScript(
        name="pass_the_mug", seed=seed, delay=delay, duration=duration, channel=_channel(seed, 0.05),
        rooms=list(DEFAULT_ROOMS),
        users=[UserDecl(1, 1, wrist), UserDecl(2, 2, Vec2(0.0, 0.45))],
        objects=[ObjectDecl("mug", Pose2(mug), owner=1)],
        proxies=[_proxy_at(1, r1, mug, rng.uniform(-math.pi, math.pi), True),
                 _proxy_at(2, r2, mug, rng.uniform(-math.pi, math.pi), False)],
        maps=[MapDecl("one_to_one", "mug", 1), MapDecl("one_to_one", "mug", 2)],
        expect={"mug": target}, gesture=GestureConfig(), timeline=timeline,
    )


def clinking_drinks(seed: int = 0, delay: float = DEFAULT_DELAY, strike: float = 3.0) -> ScenarioScript:
    """Each user holds a real mug; the partner's mug is a proxy that must be there for the clink."""
    rng = random.Random(seed)
    r1, r2 = DEFAULT_ROOMS
    a = Vec2(-0.12 + rng.uniform(-0.05, 0.05), -0.25 + rng.uniform(-0.05, 0.05))
    b = Vec2(0.12 + rng.uniform(-0.05, 0.05), 0.25 + rng.uniform(-0.05, 0.05))
    hit_a, hit_b = Vec2(0.0, -0.03), Vec2(0.0, 0.03)
    dur_a, dur_b = rng.uniform(1.0, 1.5), rng.uniform(1.0, 1.5)
    timeline = sorted([
        _ev(strike - dur_a, "hand", 1, x=hit_a.x, y=hit_a.y, dur=dur_a),
        _ev(strike - dur_b, "hand", 2, x=hit_b.x, y=hit_b.y, dur=dur_b),
    ], key=lambda e: (e.t, e.user))
    return ScenarioScript(
        name="clinking_drinks", seed=seed, delay=delay, duration=round(strike + delay + 0.4, 2),
        channel=_channel(seed, 0.05), rooms=list(DEFAULT_ROOMS),
        users=[UserDecl(1, 1, a), UserDecl(2, 2, b)],
        objects=[ObjectDecl("mug_a", Pose2(a), owner=1, tracked=True),
                 ObjectDecl("mug_b", Pose2(b), owner=2, tracked=True)],
        proxies=[_proxy_at(1, r1, b, rng.uniform(-math.pi, math.pi), True),
                 _proxy_at(2, r2, a, rng.uniform(-math.pi, math.pi), False)],
        maps=[MapDecl("one_to_one", "mug_b", 1), MapDecl("one_to_one", "mug_a", 2)],
        timeline=timeline,
    )


def random_game(rng: random.Random) -> list[int]:
    """A uniformly random legal tic-tac-toe game, cells in play order."""
    board, moves = TicTacToeBoard(), []
    while ttt_winner(board) is Outcome.NONE:
        cell = rng.choice(board.free())
        board = ttt_apply(board, cell, board.next)
        moves.append(cell)
    return moves


def tic_tac_toe(seed: int = 0, delay: float = DEFAULT_DELAY, think: float = 2.5) -> ScenarioScript:
    """Two remote players share one controller, mirrored by a proxy in each room."""
    rng = random.Random(seed)
    r1, r2 = DEFAULT_ROOMS
    ws = shared_workspace(DEFAULT_ROOMS)
    home = tile_center(5, ws)
    rest = {1: Vec2(0.0, -0.55), 2: Vec2(0.0, 0.55)}
    moves = random_game(rng)
    timeline = []
    at = home
    t = 0.5
    for k, cell in enumerate(moves):
        user = 1 if k % 2 == 0 else 2
        dest = tile_center(cell, ws)
        carry = rng.uniform(0.8, 1.0)
        timeline += [
            _ev(t, "hand", user, x=at.x, y=at.y, dur=0.5),
            _ev(t + 0.6, "grab", user, object="controller"),
            _ev(t + 0.7, "hand", user, x=dest.x, y=dest.y, dur=carry),
            _ev(t + 0.8 + carry, "release", user),
            _ev(t + 0.9 + carry, "hand", user, x=rest[user].x, y=rest[user].y, dur=0.5),
        ]
        at = dest
        t = t + 0.8 + carry + think + rng.uniform(0.0, 0.3)
    return ScenarioScript(
        name="tic_tac_toe", seed=seed, delay=delay, duration=round(t + delay, 2),
        channel=_channel(seed, 0.05), rooms=list(DEFAULT_ROOMS),
        users=[UserDecl(1, 1, rest[1]), UserDecl(2, 2, rest[2])],
        objects=[ObjectDecl("controller", Pose2(home), owner=1)],
        proxies=[_proxy_at(1, r1, home, rng.uniform(-math.pi, math.pi), True),
                 _proxy_at(2, r2, home, rng.uniform(-math.pi, math.pi), False)],
        maps=[MapDecl("many_to_one", "controller", 1), MapDecl("many_to_one", "controller", 2)],
        timeline=timeline,
    )


def city_builder(seed: int = 0) -> ScenarioScript:
    """One room, several virtual buildings, one proxy that goes wherever the hand is heading."""
    rng = random.Random(seed)
    room = DEFAULT_ROOMS[0]
    ws = shared_workspace([room])
    j = lambda: rng.uniform(-0.02, 0.02)  # noqa: E731
    spots = {"house": 7, "tower": 3, "shop": 1}
    objects = [ObjectDecl(name, Pose2(tile_center(tile, ws) + Vec2(j(), j())), owner=1)
               for name, tile in spots.items()]
    tower = objects[1].pose.position
    drop_at = tile_center(6, ws)
    rest = Vec2(-0.2, -0.45)
    timeline = [
        _ev(1.0, "hand", 1, x=tower.x, y=tower.y - 0.05, dur=1.0),
        _ev(2.2, "hand", 1, x=tower.x, y=tower.y, dur=0.2),
        _ev(2.5, "grab", 1, object="tower"),
        _ev(4.5, "hand", 1, x=drop_at.x, y=drop_at.y, dur=0.6),
        _ev(5.3, "release", 1),
    ]
    return ScenarioScript(
        name="city_builder", seed=seed, delay=0.0, duration=6.0, channel=_channel(seed, 0.0),
        rooms=[room], users=[UserDecl(1, 1, rest)], objects=objects,
        proxies=[ProxyDecl(1, 1, Pose2(tile_center(5, ws), rng.uniform(-math.pi, math.pi)))],
        maps=[MapDecl("one_to_many", name) for name in spots], pool=[1], timeline=timeline,
    )


BUILDERS = {
    "pass_the_mug": pass_the_mug,
    "clinking_drinks": clinking_drinks,
    "tic_tac_toe": tic_tac_toe,
    "city_builder": city_builder,
}
assert tuple(BUILDERS) == SCENARIO_NAMES


def builtin_script(name: str, seed: int = 0, delay: float | None = None) -> ScenarioScript:
    if name not in BUILDERS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}")
    if name == "city_builder":
        script = city_builder(seed)
        if delay is not None:
            script.delay = delay
        return script
    return BUILDERS[name](seed) if delay is None else BUILDERS[name](seed, delay)
