"""Declarative scenario scripts.

A script is a text file of canonical records, one per line::

    scenario name=pass_the_mug seed=7 delay=1.000000 duration=4.000000
    channel base_latency=0.050000 drop=0.050000 jitter=0.020000
    room half_depth=0.400000 half_width=0.600000 id=1 seat=south
    user id=1 room=1 x=0.000000 y=-0.450000
    object id=mug owner=1 x=0.000000 y=0.000000
    proxy heading=0.000000 id=1 room=1 x=0.000000 y=0.000000
    map object=mug policy=one_to_one proxy=1
    hand dur=0.350000 t=0.900000 user=1 x=0.000000 y=-0.300000
    aim object=mug t=0.200000 user=1
    grab object=mug t=1.500000 user=1
    release t=2.000000 user=1

Object and user positions are in the world frame; proxy poses are in their
room's table frame. Timeline records (``hand``, ``aim``, ``grab``,
``release``) must appear in time order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .. import records
from ..errors import ScriptValidation
from ..gesture import GestureConfig
from ..geometry import Pose2, Rect, RoomConfig, Vec2
from ..sync import ChannelModel

SCENARIO_NAMES = ("pass_the_mug", "clinking_drinks", "tic_tac_toe", "city_builder")
SEATS = {"south": -math.pi / 2, "east": 0.0, "north": math.pi / 2, "west": math.pi}
POLICIES = ("one_to_one", "many_to_one", "one_to_many")
TIMELINE_KINDS = ("hand", "aim", "grab", "release")


def seat_name(angle: float) -> str:
    for name, a in SEATS.items():
        if abs(math.remainder(angle - a, 2 * math.pi)) < 1e-9:
            return name
    raise ScriptValidation(f"seat angle {angle} is not at a table edge")


@dataclass(frozen=True)
class UserDecl:
    user: int
    room: int
    wrist: Vec2


@dataclass(frozen=True)
class ObjectDecl:
    object_id: str
    pose: Pose2
    owner: int = 1
    tracked: bool = False  # a physical, non-robotic object held by a user


@dataclass(frozen=True)
class ProxyDecl:
    proxy_id: int
    room: int
    pose: Pose2


@dataclass(frozen=True)
class MapDecl:
    policy: str
    object_id: str
    proxy_id: int | None = None


@dataclass(frozen=True)
class TimelineEvent:
    t: float
    kind: str
    user: int
    fields: dict = field(default_factory=dict)
    line: int | None = None


@dataclass
class ScenarioScript:
    name: str
    seed: int = 0
    delay: float = 0.0
    duration: float = 5.0
    channel: ChannelModel = field(default_factory=ChannelModel)
    rooms: list[RoomConfig] = field(default_factory=list)
    users: list[UserDecl] = field(default_factory=list)
    objects: list[ObjectDecl] = field(default_factory=list)
    proxies: list[ProxyDecl] = field(default_factory=list)
    maps: list[MapDecl] = field(default_factory=list)
    pool: list[int] = field(default_factory=list)
    margin: float = 0.05
    expect: dict = field(default_factory=dict)  # object_id -> tile
    gesture: GestureConfig = field(default_factory=GestureConfig)
    timeline: list[TimelineEvent] = field(default_factory=list)


def _num(fields: dict, key: str, line: int, default=None) -> float:
    if key not in fields:
        if default is not None:
            return default
        raise ScriptValidation(f"missing field {key!r}", line)
    v = fields[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScriptValidation(f"field {key!r} must be a number, got {v!r}", line)
    v = float(v)
    if not math.isfinite(v):
        raise ScriptValidation(f"field {key!r} must be finite", line)
    return v


def _int(fields: dict, key: str, line: int, default=None) -> int:
    if key not in fields:
        if default is not None:
            return default
        raise ScriptValidation(f"missing field {key!r}", line)
    v = fields[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScriptValidation(f"field {key!r} must be an integer, got {v!r}", line)
    return v


def _str(fields: dict, key: str, line: int) -> str:
    if key not in fields:
        raise ScriptValidation(f"missing field {key!r}", line)
    return str(fields[key])


def parse_script(text: str) -> ScenarioScript:
    script: ScenarioScript | None = None
    last_t = -math.inf
    gesture_overrides: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            kind, f = records.parse_record(stripped)
        except ValueError as exc:
            raise ScriptValidation(str(exc), lineno) from exc
        if kind == "scenario":
            if script is not None:
                raise ScriptValidation("duplicate scenario header", lineno)
            name = _str(f, "name", lineno)
            if name not in SCENARIO_NAMES:
                raise ScriptValidation(f"unknown scenario {name!r}", lineno)
            delay = _num(f, "delay", lineno, 0.0)
            if delay < 0:
                raise ScriptValidation("delay must be >= 0", lineno)
            duration = _num(f, "duration", lineno, 5.0)
            if duration <= 0:
                raise ScriptValidation("duration must be > 0", lineno)
            script = ScenarioScript(name, _int(f, "seed", lineno, 0), delay, duration)
            continue
        if script is None:
            raise ScriptValidation("first record must be 'scenario'", lineno)
        try:
            if kind == "channel":
                script.channel = ChannelModel(_num(f, "base_latency", lineno, 0.05),
                                              _num(f, "jitter", lineno, 0.02),
                                              _num(f, "drop", lineno, 0.0), script.seed)
            elif kind == "room":
                seat = _str(f, "seat", lineno) if "seat" in f else "south"
                if seat not in SEATS:
                    raise ScriptValidation(f"seat must be one of {sorted(SEATS)}", lineno)
                script.rooms.append(RoomConfig(_int(f, "id", lineno),
                                               Rect(_num(f, "half_width", lineno), _num(f, "half_depth", lineno)),
                                               SEATS[seat]))
            elif kind == "user":
                script.users.append(UserDecl(_int(f, "id", lineno), _int(f, "room", lineno),
                                             Vec2(_num(f, "x", lineno), _num(f, "y", lineno))))
            elif kind == "object":
                script.objects.append(ObjectDecl(
                    _str(f, "id", lineno),
                    Pose2.at(_num(f, "x", lineno), _num(f, "y", lineno), _num(f, "heading", lineno, 0.0)),
                    _int(f, "owner", lineno, 1), bool(f.get("tracked", False))))
            elif kind == "proxy":
                script.proxies.append(ProxyDecl(
                    _int(f, "id", lineno), _int(f, "room", lineno),
                    Pose2.at(_num(f, "x", lineno), _num(f, "y", lineno), _num(f, "heading", lineno, 0.0))))
            elif kind == "map":
                policy = _str(f, "policy", lineno)
                if policy not in POLICIES:
                    raise ScriptValidation(f"policy must be one of {POLICIES}", lineno)
                pid = None if policy == "one_to_many" else _int(f, "proxy", lineno)
                script.maps.append(MapDecl(policy, _str(f, "object", lineno), pid))
            elif kind == "pool":
                script.pool.append(_int(f, "proxy", lineno))
                script.margin = _num(f, "margin", lineno, script.margin)
            elif kind == "expect":
                script.expect[_str(f, "object", lineno)] = _int(f, "tile", lineno)
            elif kind == "gesture":
                gesture_overrides.update({k: _num(f, k, lineno) for k in f})
            elif kind in TIMELINE_KINDS:
                t = _num(f, "t", lineno)
                if t < last_t:
                    raise ScriptValidation(f"timeline out of order ({t} after {last_t})", lineno)
                last_t = t
                rest = {k: v for k, v in f.items() if k not in ("t", "user")}
                script.timeline.append(TimelineEvent(t, kind, _int(f, "user", lineno), rest, lineno))
            else:
                raise ScriptValidation(f"unknown record {kind!r}", lineno)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ScriptValidation):
                raise
            raise ScriptValidation(str(exc), lineno) from exc
    if script is None:
        raise ScriptValidation("empty script")
    if gesture_overrides:
        try:
            script.gesture = GestureConfig(**gesture_overrides)
        except (TypeError, ValueError) as exc:
            raise ScriptValidation(f"bad gesture config: {exc}") from exc
    validate(script)
    return script


def validate(script: ScenarioScript) -> None:
    """Cross-reference checks: every entity used is declared, ids are unique."""
    def dup(ids, what):
        seen = set()
        for i in ids:
            if i in seen:
                raise ScriptValidation(f"duplicate {what} id {i!r}")
            seen.add(i)
    if not script.rooms:
        raise ScriptValidation("script declares no rooms")
    dup([r.room_id for r in script.rooms], "room")
    dup([u.user for u in script.users], "user")
    dup([o.object_id for o in script.objects], "object")
    dup([p.proxy_id for p in script.proxies], "proxy")
    rooms = {r.room_id for r in script.rooms}
    users = {u.user for u in script.users}
    objects = {o.object_id for o in script.objects}
    proxies = {p.proxy_id: p for p in script.proxies}
    for r in script.rooms:
        seat_name(r.seat_angle)
    for u in script.users:
        if u.room not in rooms:
            raise ScriptValidation(f"user {u.user} sits in undeclared room {u.room}")
    for o in script.objects:
        if o.owner not in rooms:
            raise ScriptValidation(f"object {o.object_id!r} owned by undeclared room {o.owner}")
    for p in script.proxies:
        if p.room not in rooms:
            raise ScriptValidation(f"proxy {p.proxy_id} in undeclared room {p.room}")
    used: set[int] = set()
    m2o_rooms: dict[str, set] = {}
    for m in script.maps:
        if m.object_id not in objects:
            raise ScriptValidation(f"map references undeclared object {m.object_id!r}")
        if m.proxy_id is None:
            continue
        if m.proxy_id not in proxies:
            raise ScriptValidation(f"map references undeclared proxy {m.proxy_id}")
        if m.proxy_id in used:
            raise ScriptValidation(f"proxy {m.proxy_id} appears in more than one binding")
        used.add(m.proxy_id)
        if m.policy == "many_to_one":
            room = proxies[m.proxy_id].room
            seen = m2o_rooms.setdefault(m.object_id, set())
            if room in seen:
                raise ScriptValidation(f"object {m.object_id!r} has two proxies in room {room}")
            seen.add(room)
    for pid in script.pool:
        if pid not in proxies:
            raise ScriptValidation(f"pool references undeclared proxy {pid}")
        if pid in used:
            raise ScriptValidation(f"proxy {pid} appears in more than one binding")
        used.add(pid)
    if any(m.policy == "one_to_many" for m in script.maps) and not script.pool:
        raise ScriptValidation("one_to_many mapping needs a proxy pool")
    for oid in script.expect:
        if oid not in objects:
            raise ScriptValidation(f"expectation on undeclared object {oid!r}")
    for ev in script.timeline:
        if ev.user not in users:
            raise ScriptValidation(f"timeline references undeclared user {ev.user}", ev.line)
        oid = ev.fields.get("object")
        if oid is not None and oid not in objects:
            raise ScriptValidation(f"timeline references undeclared object {oid!r}", ev.line)
        if ev.kind == "hand" and ev.fields.get("dur", 0) < 0:
            raise ScriptValidation("hand duration must be >= 0", ev.line)


def script_lines(script: ScenarioScript) -> list[str]:
    R = records.format_record
    out = [R("scenario", {"name": script.name, "seed": script.seed,
                          "delay": float(script.delay), "duration": float(script.duration)})]
    ch = script.channel
    out.append(R("channel", {"base_latency": ch.base_latency, "jitter": ch.jitter, "drop": ch.drop_prob}))
    g = script.gesture
    out.append(R("gesture", {"aim_half_angle": g.aim_half_angle, "dwell_target": g.dwell_target,
                             "v_thresh": g.v_thresh, "window": g.window, "reach": g.reach}))
    for r in script.rooms:
        out.append(R("room", {"id": r.room_id, "half_width": r.table.half_width,
                              "half_depth": r.table.half_depth, "seat": seat_name(r.seat_angle)}))
    for u in script.users:
        out.append(R("user", {"id": u.user, "room": u.room, "x": u.wrist.x, "y": u.wrist.y}))
    for o in script.objects:
        f = {"id": o.object_id, "owner": o.owner, "x": o.pose.position.x, "y": o.pose.position.y,
             "heading": o.pose.heading}
        if o.tracked:
            f["tracked"] = True
        out.append(R("object", f))
    for p in script.proxies:
        out.append(R("proxy", {"id": p.proxy_id, "room": p.room, "x": p.pose.position.x,
                               "y": p.pose.position.y, "heading": p.pose.heading}))
    for m in script.maps:
        f = {"policy": m.policy, "object": m.object_id}
        if m.proxy_id is not None:
            f["proxy"] = m.proxy_id
        out.append(R("map", f))
    for pid in script.pool:
        out.append(R("pool", {"proxy": pid, "margin": script.margin}))
    for oid, tile in sorted(script.expect.items()):
        out.append(R("expect", {"object": oid, "tile": tile}))
    for ev in script.timeline:
        out.append(R(ev.kind, {"t": float(ev.t), "user": ev.user, **ev.fields}))
    return out


def script_text(script: ScenarioScript) -> str:
    return "\n".join(script_lines(script)) + "\n"
