"""Fixed-step scenario loop.

Each tick (``DT`` seconds) runs, in order: timeline inputs, wrists, gesture
machines, grabs and releases, authoritative object motion, 20 Hz publishing,
message delivery, rendered views, pool dispatch, robot control, binding
states and safety checks. Everything observable goes into a :class:`Trace`.

Frames: object and wrist positions live in the world frame, which is the
first room's canonical frame; every other room's canonical frame is turned a
half turn so partners face each other. Robots work in their room's table frame.

Rendering: a room sees an object through its delay buffer (``delay`` seconds
late) unless the object is physically present there, i.e. it is a tracked
object of that room or was last carried by a user of that room.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .. import records
from ..errors import ProxySyncError
from ..gesture import EventKind, GestureMachine, Phase, WristSample, grab_check
from ..geometry import (Pose2, RigidTransform2, Vec2, seat_position, shared_workspace, tile_of,
                        world_transform)
from ..mapping import Binding, DemandPoint, StickySelector, dispatch_one_to_many
from ..proxy import (DEFAULT_LIMITS, DT, RobotLimits, RobotState, RobotStatus, drive_to,
                     proximity_violations, step_robot)
from ..sync import (REPUBLISH_HZ, DelayBuffer, Envelope, Kind, Link, ReliableReceiver,
                    ReliableSender, Replica, delayed_view, pose_body, publish_due, snapshot_of,
                    to_micros)
from .game import Mark, Outcome, TicTacToeBoard, ttt_apply, ttt_winner
from .script import ScenarioScript, seat_name

GLIDE_SPEED = 0.5   # m/s, virtual object gliding to a gesture destination
ACCEL_FRACTION = 0.25  # share of a hand segment spent accelerating (and decelerating)
CONTACT_EPS = 1e-5
_NO_AIM = Vec2(0.0, 0.0)


class Trace:
    """Ordered event log; each event is ``(kind, fields)``."""

    def __init__(self, events=None):
        self.events: list[tuple[str, dict]] = list(events or [])

    def add(self, kind: str, fields: dict) -> None:
        self.events.append((kind, fields))

    def of_kind(self, kind: str) -> list[dict]:
        return [f for k, f in self.events if k == kind]

    def lines(self) -> list[str]:
        return [records.format_record(k, f) for k, f in self.events]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Trace":
        return cls([(k, f) for _, k, f in records.iter_records(text.splitlines())])

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other) -> bool:
        return isinstance(other, Trace) and self.lines() == other.lines()


def trapezoid_fraction(tau: float, accel: float = ACCEL_FRACTION) -> float:
    """Distance share covered at time share ``tau`` of a trapezoidal speed profile."""
    if tau <= 0.0:
        return 0.0
    if tau >= 1.0:
        return 1.0
    vp = 1.0 / (1.0 - accel)
    if tau < accel:
        return 0.5 * vp / accel * tau * tau
    if tau <= 1.0 - accel:
        return 0.5 * vp * accel + vp * (tau - accel)
    rest = 1.0 - tau
    return 1.0 - 0.5 * vp / accel * rest * rest


@dataclass
class _User:
    uid: int
    room: int
    wrist: Vec2
    seat: Vec2
    machine: GestureMachine
    aim: str | None = None
    segment: tuple | None = None  # (t0, dur, start, end)
    grab_request: str | None = None
    loading_reason: str | None = None
    holding: str | None = None
    mark: Mark | None = None


@dataclass
class _Object:
    oid: str
    pose: Pose2
    owner: int
    tracked: bool
    embodied: int | None
    carrier: int | None = None
    offset: Vec2 = Vec2(0.0, 0.0)
    glide_to: Vec2 | None = None
    moving: bool = False
    move_start: float = 0.0


@dataclass
class _Robot:
    pid: int
    room: int
    state: RobotState
    policy: str | None = None
    object_id: str | None = None
    target: Vec2 | None = None
    engaged: bool | None = None


@dataclass
class _Contact:
    room: int
    object_id: str
    proxy: int
    where: Vec2  # world position the rendered object has to reach
    start: float


@dataclass
class RunResult:
    trace: Trace
    violations: list = field(default_factory=list)


class _Engine:
    def __init__(self, script: ScenarioScript, limits: RobotLimits = DEFAULT_LIMITS):
        self.s = script
        self.lim = limits
        self.trace = Trace()
        self.violations: list[str] = []
        self.dt_us = to_micros(DT)
        self.period_us = to_micros(1.0 / REPUBLISH_HZ)
        self.delay = script.delay

        self.rooms = {r.room_id: r for r in script.rooms}
        self.room_ids = [r.room_id for r in script.rooms]
        first = self.room_ids[0]
        self.ws = shared_workspace(script.rooms)
        self.to_world: dict[int, RigidTransform2] = {}
        self.from_world: dict[int, RigidTransform2] = {}
        for rid, cfg in self.rooms.items():
            tw = world_transform(cfg, opposite=rid != first)
            self.to_world[rid] = tw
            self.from_world[rid] = tw.inverse()
        # canonical south seat, turned into the world frame for partner rooms
        south = seat_position(self.ws)
        self.seat = {rid: (south if rid == first else -south) for rid in self.room_ids}

        self.objects: dict[str, _Object] = {}
        for o in script.objects:
            self.objects[o.object_id] = _Object(o.object_id, o.pose, o.owner, o.tracked,
                                                o.owner if o.tracked else None)
        self.oids = sorted(self.objects)

        self.users: dict[int, _User] = {}
        for u in script.users:
            self.users[u.user] = _User(u.user, u.room, u.wrist, self.seat[u.room],
                                       GestureMachine(u.user, script.gesture))
        self.uids = sorted(self.users)
        self.room_user = {}
        for uid in self.uids:
            self.room_user.setdefault(self.users[uid].room, uid)
        for o in self.objects.values():
            if o.tracked:
                uid = self.room_user.get(o.owner)
                if uid is not None:
                    o.carrier = uid
                    o.offset = o.pose.position - self.users[uid].wrist

        self.robots: dict[int, _Robot] = {}
        for p in script.proxies:
            self.robots[p.proxy_id] = _Robot(p.proxy_id, p.room, RobotState(p.pose))
        for m in script.maps:
            if m.proxy_id is not None:
                rb = self.robots[m.proxy_id]
                rb.policy, rb.object_id = m.policy, m.object_id
        self.pids = sorted(self.robots)
        self.robots_in = {rid: [p for p in self.pids if self.robots[p].room == rid] for rid in self.room_ids}
        # room -> object -> one_to_one proxy (landing contacts only make sense there)
        self.one_to_one: dict[int, dict[str, int]] = {rid: {} for rid in self.room_ids}
        for m in script.maps:
            if m.policy == "one_to_one":
                self.one_to_one[self.robots[m.proxy_id].room][m.object_id] = m.proxy_id
        for pid in script.pool:
            self.robots[pid].policy = "pool"
        self.pool_objects = sorted({m.object_id for m in script.maps if m.policy == "one_to_many"})
        self.pool_rooms = sorted({self.robots[p].room for p in script.pool})
        self.selectors = {rid: StickySelector(script.margin) for rid in self.pool_rooms}

        # replication
        self.replicas = {rid: Replica() for rid in self.room_ids}
        self.links = {rid: Link(script.channel, rid) for rid in self.room_ids}
        self.seq = {rid: 0 for rid in self.room_ids}
        self.buffers: dict[int, dict[str, DelayBuffer]] = {}
        seed_t = -(self.delay + 1.0)
        for rid in self.room_ids:
            self.buffers[rid] = {}
            for oid, o in self.objects.items():
                buf = DelayBuffer(self.delay)
                buf.push(seed_t, o.pose)
                self.buffers[rid][oid] = buf
        self.views: dict[int, dict[str, Pose2]] = {rid: {oid: o.pose for oid, o in self.objects.items()}
                                                   for rid in self.room_ids}
        self.last_view: dict[tuple, Pose2] = {}
        self.pending_contacts: list[_Contact] = []

        # game
        self.game = script.name == "tic_tac_toe"
        self.game_object = next((m.object_id for m in script.maps if m.policy == "many_to_one"), None)
        self.boards = {rid: TicTacToeBoard() for rid in self.room_ids}
        self.winner_seen: set[int] = set()
        self.senders = {(a, b): ReliableSender(a) for a in self.room_ids for b in self.room_ids if a != b}
        self.receivers = {(a, b): ReliableReceiver(a) for a in self.room_ids for b in self.room_ids if a != b}
        if self.game:
            for mark, uid in zip((Mark.X, Mark.O), self.uids):
                self.users[uid].mark = mark

        self.timeline = list(script.timeline)
        self.next_event = 0
        self.safety_pairs: set = set()
        self.t = 0.0

    # -- helpers -------------------------------------------------------------------

    def emit(self, record: str, /, **fields) -> None:
        self.trace.add(record, fields)

    def to_local(self, rid: int, world) -> Vec2:
        cfg = self.rooms[rid]
        return cfg.table.clamp(self.from_world[rid].apply(world))

    def local_to_world(self, rid: int, local) -> Vec2:
        return self.to_world[rid].apply(local)

    def knowledge(self, rid: int, oid: str) -> Pose2:
        """Freshest pose room ``rid`` holds for ``oid`` (no rendering delay)."""
        o = self.objects[oid]
        if o.owner == rid:
            return o.pose
        snap = self.replicas[rid].snapshots.get(oid)
        return snap.pose if snap is not None else self.buffers[rid][oid].latest()

    # -- setup ---------------------------------------------------------------------

    def header(self) -> None:
        s = self.s
        self.emit("scenario", name=s.name, seed=s.seed, delay=float(s.delay), duration=float(s.duration),
                  dt=DT)
        ch = s.channel
        self.emit("channel", base_latency=ch.base_latency, jitter=ch.jitter, drop=ch.drop_prob)
        first = self.room_ids[0]
        for rid in self.room_ids:
            cfg = self.rooms[rid]
            self.emit("room", id=rid, half_width=cfg.table.half_width, half_depth=cfg.table.half_depth,
                      seat=seat_name(cfg.seat_angle), opposite=rid != first)
        b = self.ws.bounds
        self.emit("workspace", half_width=b.half_width, half_depth=b.half_depth)
        for uid in self.uids:
            u = self.users[uid]
            f = dict(id=uid, room=u.room, x=u.wrist.x, y=u.wrist.y)
            if u.mark is not None:
                f["mark"] = u.mark.value
            self.emit("user", **f)
        for oid in self.oids:
            o = self.objects[oid]
            self.emit("object", t=0.0, id=oid, x=o.pose.position.x, y=o.pose.position.y,
                      heading=o.pose.heading, owner=o.owner, tracked=o.tracked)
        for pid in self.pids:
            rb = self.robots[pid]
            p = rb.state.pose
            self.emit("proxy", id=pid, room=rb.room, x=p.position.x, y=p.position.y, heading=p.heading,
                      policy=rb.policy or "none", object=rb.object_id or "none")
        for oid, tile in sorted(self.s.expect.items()):
            self.emit("expect", object=oid, tile=tile)

    # -- per tick --------------------------------------------------------------------

    def run(self) -> RunResult:
        self.header()
        n_ticks = int(round(self.s.duration / DT))
        for tick in range(n_ticks + 1):
            self.t = t = tick * self.dt_us / 1_000_000
            self.emit("tick", n=tick, t=t)
            self.timeline_inputs(t)
            self.move_wrists(t)
            self.gestures(t)
            self.grabs(t)
            self.move_objects(t, tick)
            self.publish(t, tick)
            self.deliver(t)
            self.render(t)
            self.dispatch(t)
            self.drive(t, tick)
            self.safety(t)
        self.finish()
        return RunResult(self.trace, self.violations)

    def timeline_inputs(self, t: float) -> None:
        tl = self.timeline
        while self.next_event < len(tl) and tl[self.next_event].t <= t + 1e-9:
            ev = tl[self.next_event]
            self.next_event += 1
            u = self.users[ev.user]
            f = ev.fields
            if ev.kind == "hand":
                end = Vec2(float(f["x"]), float(f["y"]))
                dur = float(f.get("dur", 0.0))
                if dur <= 0:
                    u.wrist, u.segment = end, None
                else:
                    u.segment = (ev.t, dur, u.wrist, end)
            elif ev.kind == "aim":
                u.aim = None if f.get("off") or "object" not in f else str(f["object"])
            elif ev.kind == "grab":
                u.grab_request = str(f["object"])
                u.loading_reason = None
            elif ev.kind == "release":
                if u.holding is not None:
                    self.release(u, t)
                elif u.grab_request is not None:
                    self.emit("loading", t=t, user=u.uid, object=u.grab_request, reason="cancelled")
                    u.grab_request = None

    def move_wrists(self, t: float) -> None:
        for uid in self.uids:
            u = self.users[uid]
            if u.segment is None:
                continue
            t0, dur, a, b = u.segment
            k = trapezoid_fraction((t - t0) / dur)
            u.wrist = Vec2(a.x + (b.x - a.x) * k, a.y + (b.y - a.y) * k)
            if k >= 1.0:
                u.segment = None

    def gestures(self, t: float) -> None:
        for uid in self.uids:
            u = self.users[uid]
            m = u.machine
            if u.aim is None and m.state.phase is not Phase.LOCKED and m.state.phase is not Phase.TARGETING:
                continue
            view = self.views[u.room]
            palm = _NO_AIM
            if u.aim is not None and u.aim in view:
                rel = view[u.aim].position - u.wrist
                n = rel.norm()
                if n > 1e-9:
                    palm = Vec2(rel.x / n, rel.y / n)
            visible = {oid: view[oid] for oid in self.oids
                       if not self.objects[oid].tracked and self.objects[oid].carrier is None}
            events = m.feed(WristSample(t, u.wrist, palm), visible, DT, u.seat, self.ws)
            for ev in events:
                if ev.kind is EventKind.COMMAND:
                    dest_tile = tile_of(ev.destination, self.ws)
                    self.emit("gesture", t=t, user=uid, kind=ev.kind.value, object=ev.object_id,
                              command=ev.command.kind.value, tile=dest_tile)
                    o = self.objects[ev.object_id]
                    o.glide_to = ev.destination
                    o.owner = u.room
                    o.embodied = None
                else:
                    self.emit("gesture", t=t, user=uid, kind=ev.kind.value, object=ev.object_id)

    def _grab_blocker(self, u: _User, oid: str) -> str | None:
        o = self.objects[oid]
        if o.tracked or (o.carrier is not None and o.carrier != u.uid):
            return "held"
        if not grab_check(u.wrist, self.views[u.room][oid].position, self.s.gesture):
            return "reach"
        bound = [self.robots[p] for p in self.robots_in[u.room] if self.robots[p].object_id == oid]
        if bound and not all(rb.engaged for rb in bound):
            return "pending"
        if not bound and oid in self.pool_objects:
            return "pending"
        if self.game and oid == self.game_object:
            board = self.boards[u.room]
            if ttt_winner(board) is not Outcome.NONE or board.next is not u.mark:
                return "turn"
        return None

    def grabs(self, t: float) -> None:
        for uid in self.uids:
            u = self.users[uid]
            oid = u.grab_request
            if oid is None:
                continue
            reason = self._grab_blocker(u, oid)
            if reason is not None:
                if reason != u.loading_reason:
                    self.emit("loading", t=t, user=uid, object=oid, reason=reason)
                    u.loading_reason = reason
                continue
            o = self.objects[oid]
            u.grab_request, u.loading_reason, u.holding = None, None, oid
            u.machine.grab(oid)
            o.carrier, o.owner, o.embodied, o.glide_to = uid, u.room, u.room, None
            o.offset = self.views[u.room][oid].position - u.wrist
            self.emit("gesture", t=t, user=uid, kind=EventKind.GRAB.value, object=oid)
            for pid in self.robots_in[u.room]:
                rb = self.robots[pid]
                if rb.object_id == oid:
                    self.emit_contact(rb, "grab", t, rb.target)

    def release(self, u: _User, t: float) -> None:
        oid = u.holding
        o = self.objects[oid]
        u.holding = None
        u.machine.release()
        o.carrier = None
        self.emit("gesture", t=t, user=u.uid, kind=EventKind.RELEASE.value, object=oid)
        if self.game and oid == self.game_object:
            cell = tile_of(o.pose.position, self.ws)
            self.play(u.room, cell, u.mark, t, "local")
            for (a, b), sender in self.senders.items():
                if a == u.room:
                    env = sender.send({"cell": cell, "mark": u.mark.value}, t)
                    self.links[b].send([env], t)

    def play(self, rid: int, cell: int, mark: Mark, t: float, source: str) -> None:
        try:
            self.boards[rid] = ttt_apply(self.boards[rid], cell, mark)
        except ProxySyncError as exc:
            self.violations.append(f"illegal move in room {rid}: {exc}")
            self.emit("violation", t=t, room=rid, reason=type(exc).__name__)
            return
        self.emit("game", t=t, room=rid, cell=cell, mark=mark.value, source=source)
        outcome = ttt_winner(self.boards[rid])
        if outcome is not Outcome.NONE and rid not in self.winner_seen:
            self.winner_seen.add(rid)
            self.emit("winner", t=t, room=rid, outcome=outcome.value, board=str(self.boards[rid]))

    def move_objects(self, t: float, tick: int) -> None:
        for oid in self.oids:
            o = self.objects[oid]
            old = o.pose
            if o.carrier is not None:
                w = self.users[o.carrier].wrist
                new = Pose2(Vec2(w.x + o.offset.x, w.y + o.offset.y), old.heading)
            elif o.glide_to is not None:
                p, g = old.position, o.glide_to
                d = p.dist(g)
                step = GLIDE_SPEED * DT
                if d <= step:
                    new, o.glide_to = Pose2(g, old.heading), None
                else:
                    k = step / d
                    new = Pose2(Vec2(p.x + (g.x - p.x) * k, p.y + (g.y - p.y) * k), old.heading)
            else:
                new = old
            buf = self.buffers[o.owner][oid]
            if new != old:
                if not o.moving:
                    o.moving, o.move_start = True, t
                    if tick > 0:
                        buf.push(t - DT, old)
                o.pose = new
                buf.push(t, new)
                self.emit("object", t=t, id=oid, x=new.position.x, y=new.position.y, heading=new.heading,
                          owner=o.owner, tracked=o.tracked)
            elif o.moving:
                o.moving = False
                buf.push(t, new)
                self.landed(o, t)

    def landed(self, o: _Object, t: float) -> None:
        """The object came to rest; every room that only sees it will see it land later."""
        for rid in self.room_ids:
            if rid == o.embodied:
                continue
            pid = self.one_to_one[rid].get(o.oid)
            if pid is not None:
                self.pending_contacts.append(_Contact(rid, o.oid, pid, o.pose.position, o.move_start))

    def publish(self, t: float, tick: int) -> None:
        if len(self.room_ids) < 2:
            return
        if publish_due(tick, self.dt_us, self.period_us):
            for rid in self.room_ids:
                out = []
                for oid in self.oids:
                    o = self.objects[oid]
                    if o.owner != rid:
                        continue
                    self.seq[rid] += 1
                    env = Envelope(self.seq[rid], t, rid, Kind.POSE_UPDATE, pose_body(oid, o.pose))
                    self.replicas[rid].apply(snapshot_of(env))
                    out.append(env)
                if out:
                    for other in self.room_ids:
                        if other != rid:
                            self.links[other].send(out, t)
        for (a, b), sender in self.senders.items():
            if sender.unacked:
                again = sender.poll(t)
                if again:
                    self.links[b].send(again, t)

    def deliver(self, t: float) -> None:
        for rid in self.room_ids:
            for env in self.links[rid].receive(t):
                if env.kind is Kind.POSE_UPDATE:
                    snap = snapshot_of(env)
                    if self.replicas[rid].apply(snap):
                        if self.objects[snap.entity_id].owner != rid:
                            self.buffers[rid][snap.entity_id].push(env.sent_at, snap.pose)
                elif env.kind is Kind.GAME_EVENT:
                    got, ack = self.receivers[(rid, env.room_id)].receive(env, t)
                    for body in got:
                        self.play(rid, int(body["cell"]), Mark(str(body["mark"])), t, "remote")
                    self.links[env.room_id].send([ack], t)
                elif env.kind is Kind.ACK:
                    self.senders[(rid, env.room_id)].on_ack(env)

    def render(self, t: float) -> None:
        for rid in self.room_ids:
            view = self.views[rid]
            bufs = self.buffers[rid]
            for oid in self.oids:
                o = self.objects[oid]
                if o.embodied == rid:
                    pose = o.pose
                elif self.delay == 0.0:
                    pose = bufs[oid].latest()
                else:
                    pose = delayed_view(bufs[oid], t)
                view[oid] = pose
                key = (rid, oid)
                if self.last_view.get(key) != pose:
                    self.last_view[key] = pose
                    self.emit("view", t=t, room=rid, object=oid, x=pose.position.x, y=pose.position.y,
                              heading=pose.heading)
        if self.pending_contacts:
            still = []
            for c in self.pending_contacts:
                seen = self.views[c.room][c.object_id].position
                if seen.dist(c.where) <= CONTACT_EPS:
                    rb = self.robots[c.proxy]
                    self.emit_contact(rb, "landing", t, rb.target, start=c.start)
                else:
                    still.append(c)
            self.pending_contacts = still

    def emit_contact(self, rb: _Robot, kind: str, t: float, target, start: float | None = None) -> None:
        if target is None:
            target = rb.state.pose.position
        f = dict(t=t, room=rb.room, object=rb.object_id, proxy=rb.pid, kind=kind, x=target.x, y=target.y,
                 tol=self.lim.arrive_pos_tol)
        if start is not None:
            f["start"] = start
        self.emit("contact", **f)

    def dispatch(self, t: float) -> None:
        for rid in self.pool_rooms:
            uid = self.room_user.get(rid)
            if uid is None:
                continue
            u = self.users[uid]
            view = self.views[rid]
            if u.holding in self.pool_objects:
                chosen = u.holding
                self.selectors[rid].current = chosen
            else:
                chosen = self.selectors[rid].choose(u.wrist, {oid: view[oid].position for oid in self.pool_objects})
            pool = {p: self.robots[p].state.pose.position for p in self.s.pool if self.robots[p].room == rid}
            current = list(self._pool_bindings(rid))
            demands = [] if chosen is None else [DemandPoint(chosen, self.to_local(rid, view[chosen].position))]
            bindings, _ = dispatch_one_to_many(demands, pool, current, self.s.margin, rid)
            by_proxy = {b.proxy_id: b.object_id for b in bindings}
            for pid in sorted(pool):
                rb = self.robots[pid]
                new = by_proxy.get(pid)
                if new != rb.object_id:
                    self.emit("bind", t=t, room=rid, proxy=pid, object=new or "none", prev=rb.object_id or "none")
                    rb.object_id, rb.engaged = new, None

    def _pool_bindings(self, rid: int):
        for p in self.s.pool:
            rb = self.robots[p]
            if rb.room == rid and rb.object_id is not None:
                yield Binding(rb.object_id, p, rid)

    def drive(self, t: float, tick: int) -> None:
        lim = self.lim
        for pid in self.pids:
            rb = self.robots[pid]
            before = rb.state
            oid = rb.object_id
            if oid is None:
                target = None
            elif rb.policy == "one_to_one":
                target = self.to_local(rb.room, self.knowledge(rb.room, oid).position)
            else:
                target = self.to_local(rb.room, self.views[rb.room][oid].position)
            rb.target = target
            o = self.objects.get(oid) if oid is not None else None
            if o is not None and o.carrier is not None and self.users[o.carrier].room == rb.room:
                # the held object is this room's proxy
                rb.state = RobotState(Pose2(target, before.pose.heading), RobotStatus.CARRYING)
                engaged = True
            elif target is None:
                status = RobotStatus.IDLE if before.status is not RobotStatus.ARRIVED else before.status
                rb.state = RobotState(before.pose, status)
                engaged = None
            else:
                st = before if before.status is not RobotStatus.CARRYING else RobotState(before.pose)
                cmd, status = drive_to(st, target, lim)
                pose = step_robot(st, cmd, DT, lim).pose if status is not RobotStatus.ARRIVED else st.pose
                engaged = pose.position.dist(target) <= lim.arrive_pos_tol
                rb.state = RobotState(pose, RobotStatus.ARRIVED if engaged else status)
            s = rb.state
            if s != before or tick == 0:
                p = s.pose
                self.emit("robot", t=t, id=pid, room=rb.room, x=p.position.x, y=p.position.y, heading=p.heading,
                          status=s.status.value)
            if engaged is not None and engaged != rb.engaged:
                self.emit("binding", t=t, object=oid, proxy=pid, room=rb.room,
                          state="engaged" if engaged else "pending")
            rb.engaged = engaged

    def safety(self, t: float) -> None:
        for rid in self.room_ids:
            pids = self.robots_in[rid]
            if len(pids) < 2:
                continue
            bad = proximity_violations({p: self.robots[p].state.pose.position for p in pids})
            now = set()
            for a, b, d in bad:
                now.add((a, b))
                if (a, b) not in self.safety_pairs:
                    self.violations.append(f"proxies {a} and {b} within {d:.3f} m")
                    self.emit("safety", t=t, room=rid, a=a, b=b, distance=d)
            self.safety_pairs = {pr for pr in self.safety_pairs if pr[0] not in pids} | now

    def finish(self) -> None:
        t = self.t
        for oid, tile in sorted(self.s.expect.items()):
            got = tile_of(self.objects[oid].pose.position, self.ws)
            self.emit("outcome", object=oid, expected=tile, tile=got, ok=got == tile)
        if self.game:
            for rid in self.room_ids:
                self.emit("board", room=rid, cells=str(self.boards[rid]),
                          outcome=ttt_winner(self.boards[rid]).value)
        self.emit("end", t=t, violations=len(self.violations))


def run_scenario(script: ScenarioScript, limits: RobotLimits = DEFAULT_LIMITS) -> Trace:
    return _Engine(script, limits).run().trace


def run_scenario_checked(script: ScenarioScript, limits: RobotLimits = DEFAULT_LIMITS) -> RunResult:
    """Like :func:`run_scenario` but also returns the invariant violations seen."""
    return _Engine(script, limits).run()
