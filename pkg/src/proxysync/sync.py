"""Replicating room state over a lossy channel.

Wire layout of an envelope (all integers big-endian)::

    offset size field
    0      4    magic "HPRX"
    4      1    version (1)
    5      1    kind
    6      1    room id
    7      4    seq
    11     8    sent_at, microseconds
    19     2    body length
    21     n    body: canonical record fields, UTF-8

Poses are last-writer-wins on ``(sent_at, seq, room_id)``. Game events ride a
reliable, ordered sub-channel with cumulative acks. Remote motion is shown
through a delay buffer so that physical proxies can get there first.
"""

from __future__ import annotations

import bisect
import enum
import hashlib
import heapq
import math
import random
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import records
from .errors import BadMagic, MalformedBody, TruncatedBody, Underflow, UnknownVersion
from .geometry import Pose2, Vec2, angle_diff

MAGIC = b"HPRX"
VERSION = 1
HEADER = struct.Struct(">4sBBBIQH")
HEADER_SIZE = HEADER.size
MAX_BODY = 0xFFFF
RETRANSMIT_INTERVAL = 0.2
REPUBLISH_HZ = 20.0


class Kind(enum.IntEnum):
    POSE_UPDATE = 1
    BINDING_UPDATE = 2
    GESTURE_EVENT = 3
    GAME_EVENT = 4
    ACK = 5


def to_micros(t: float) -> int:
    return int(round(t * 1_000_000))


def _canonical_body(body: Mapping[str, records.Value]) -> dict[str, records.Value]:
    out = {}
    for k, v in body.items():
        if isinstance(v, float) and not isinstance(v, bool):
            v = float(records.format_value(v))
        out[k] = v
    return out


@dataclass(frozen=True)
class Envelope:
    seq: int
    sent_at: float
    room_id: int
    kind: Kind
    body: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.seq <= 0xFFFFFFFF:
            raise ValueError(f"seq out of range: {self.seq}")
        if not 0 <= self.room_id <= 0xFF:
            raise ValueError(f"room id out of range: {self.room_id}")
        if not (math.isfinite(self.sent_at) and self.sent_at >= 0):
            raise ValueError(f"bad sent_at: {self.sent_at}")
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "sent_at", to_micros(self.sent_at) / 1_000_000)
        object.__setattr__(self, "body", _canonical_body(self.body))


def encode(e: Envelope) -> bytes:
    body = records.format_fields(e.body).encode("utf-8")
    if len(body) > MAX_BODY:
        raise ValueError("body too long")
    return HEADER.pack(MAGIC, VERSION, int(e.kind), e.room_id, e.seq,
                       to_micros(e.sent_at), len(body)) + body


def decode(data: bytes) -> Envelope:
    if len(data) >= 4 and data[:4] != MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}")
    if len(data) < HEADER_SIZE:
        raise TruncatedBody(f"need {HEADER_SIZE} header bytes, got {len(data)}")
    magic, version, kind, room, seq, micros, length = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnknownVersion(f"unknown version {version}")
    try:
        kind = Kind(kind)
    except ValueError as exc:
        raise MalformedBody(f"unknown kind {kind}") from exc
    body = data[HEADER_SIZE:]
    if len(body) < length:
        raise TruncatedBody(f"body declares {length} bytes, got {len(body)}")
    if len(body) > length:
        raise MalformedBody(f"{len(body) - length} trailing bytes")
    try:
        fields = records.parse_fields(body.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise MalformedBody(str(exc)) from exc
    return Envelope(seq, micros / 1_000_000, room, kind, fields)


# -- channel -----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ChannelModel:
    base_latency: float = 0.05
    jitter: float = 0.02
    drop_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_latency < 0 or self.jitter < 0:
            raise ValueError("latency and jitter must be non-negative")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError("drop_prob must lie in [0, 1]")


def _fate(model: ChannelModel, e: Envelope, dest: int) -> tuple[float, float]:
    key = struct.pack(">QBBBIQ", model.seed & 0xFFFFFFFFFFFFFFFF, dest & 0xFF,
                      e.room_id, int(e.kind), e.seq, to_micros(e.sent_at))
    digest = hashlib.blake2b(key, digest_size=16).digest()
    a, b = struct.unpack(">QQ", digest)
    return a / 2.0**64, b / 2.0**64


def channel_deliver(msgs: Iterable[Envelope], model: ChannelModel, now: float | None = None,
                    dest: int = 0) -> list[tuple[float, Envelope]]:
    """Delivery schedule ``[(deliver_at, envelope)]`` for messages bound to ``dest``.

    Each message's fate hangs only on the model and the message itself, so the
    schedule is a pure function of its inputs and independent of batching.
    """
    out = []
    for e in msgs:
        u_drop, u_jit = _fate(model, e, dest)
        if u_drop < model.drop_prob:
            continue
        at = e.sent_at + model.base_latency + model.jitter * (2.0 * u_jit - 1.0)
        at = max(at, e.sent_at if now is None else max(now, e.sent_at))
        out.append((at, e))
    out.sort(key=lambda p: (p[0], p[1].room_id, int(p[1].kind), p[1].seq))
    return out


class Link:
    """In-flight messages towards one destination."""

    def __init__(self, model: ChannelModel, dest: int):
        self.model = model
        self.dest = dest
        self._heap: list = []
        self._n = 0

    def send(self, msgs: Iterable[Envelope], now: float) -> None:
        for at, e in channel_deliver(msgs, self.model, now, self.dest):
            heapq.heappush(self._heap, (at, self._n, e))
            self._n += 1

    def receive(self, now: float) -> list[Envelope]:
        out = []
        while self._heap and self._heap[0][0] <= now + 1e-12:
            out.append(heapq.heappop(self._heap)[2])
        return out

    def __len__(self) -> int:
        return len(self._heap)


# -- last-writer-wins replica ----------------------------------------------------

@dataclass(frozen=True, slots=True)
class EntitySnapshot:
    entity_id: str
    pose: Pose2
    stamp: tuple  # (sent_at, seq, room_id)


def reconcile(replica: Mapping[str, EntitySnapshot], snap: EntitySnapshot) -> dict[str, EntitySnapshot]:
    """Copy of ``replica`` holding ``snap`` if it is newer than what is stored."""
    held = replica.get(snap.entity_id)
    out = dict(replica)
    if held is None or snap.stamp > held.stamp:
        out[snap.entity_id] = snap
    return out


class Replica:
    """Mutable replica for hot loops; same rule as :func:`reconcile`."""

    def __init__(self):
        self.snapshots: dict[str, EntitySnapshot] = {}

    def apply(self, snap: EntitySnapshot) -> bool:
        held = self.snapshots.get(snap.entity_id)
        if held is None or snap.stamp > held.stamp:
            self.snapshots[snap.entity_id] = snap
            return True
        return False

    def poses(self) -> dict[str, Pose2]:
        return {k: s.pose for k, s in self.snapshots.items()}


def pose_body(entity_id: str, pose: Pose2) -> dict:
    return {"entity": entity_id, "x": pose.position.x, "y": pose.position.y, "heading": pose.heading}


def snapshot_of(e: Envelope) -> EntitySnapshot:
    b = e.body
    return EntitySnapshot(str(b["entity"]), Pose2.at(float(b["x"]), float(b["y"]), float(b["heading"])),
                          (e.sent_at, e.seq, e.room_id))


# -- reliable ordered sub-channel --------------------------------------------------

class ReliableSender:
    """Retransmits every event until a cumulative ack covers it."""

    def __init__(self, room_id: int, kind: Kind = Kind.GAME_EVENT,
                 interval: float = RETRANSMIT_INTERVAL):
        self.room_id = room_id
        self.kind = kind
        self.interval = interval
        self.next_seq = 1
        self.unacked: dict[int, tuple[dict, float]] = {}

    def send(self, body: dict, now: float) -> Envelope:
        seq = self.next_seq
        self.next_seq += 1
        self.unacked[seq] = (body, now)
        return Envelope(seq, now, self.room_id, self.kind, body)

    def poll(self, now: float) -> list[Envelope]:
        out = []
        for seq in sorted(self.unacked):
            body, last = self.unacked[seq]
            if now - last >= self.interval - 1e-9:
                self.unacked[seq] = (body, now)
                out.append(Envelope(seq, now, self.room_id, self.kind, body))
        return out

    def on_ack(self, ack: Envelope) -> None:
        upto = int(ack.body["ack"])
        for seq in [s for s in self.unacked if s <= upto]:
            del self.unacked[seq]


class ReliableReceiver:
    """Delivers each event exactly once, in sequence order, buffering gaps."""

    def __init__(self, room_id: int):
        self.room_id = room_id
        self.expected = 1
        self.pending: dict[int, dict] = {}
        self._ack_seq = 0

    def receive(self, e: Envelope, now: float) -> tuple[list[dict], Envelope]:
        if e.seq >= self.expected:
            self.pending.setdefault(e.seq, e.body)
        delivered = []
        while self.expected in self.pending:
            delivered.append(self.pending.pop(self.expected))
            self.expected += 1
        self._ack_seq += 1
        ack = Envelope(self._ack_seq, now, self.room_id, Kind.ACK, {"ack": self.expected - 1})
        return delivered, ack


# -- latency masking ---------------------------------------------------------------

class DelayBuffer:
    """Time-ordered pose samples, viewed ``delay`` seconds in the past."""

    def __init__(self, delay: float, horizon: float | None = None):
        if delay < 0:
            raise ValueError("delay must be non-negative")
        self.delay = delay
        self.horizon = max(2.0 * delay, 0.5) if horizon is None else horizon
        self.times: list[float] = []
        self.poses: list[Pose2] = []

    def push(self, t: float, pose: Pose2) -> None:
        if self.times and t <= self.times[-1]:
            if t == self.times[-1]:
                self.poses[-1] = pose
            return
        self.times.append(t)
        self.poses.append(pose)
        if len(self.times) > 64:
            cut = bisect.bisect_left(self.times, t - self.horizon) - 1
            if cut > 0:
                del self.times[:cut]
                del self.poses[:cut]

    def latest(self) -> Pose2:
        return self.poses[-1]


def interpolate_pose(a: Pose2, b: Pose2, f: float) -> Pose2:
    pa, pb = a.position, b.position
    return Pose2(Vec2(pa.x + (pb.x - pa.x) * f, pa.y + (pb.y - pa.y) * f),
                 a.heading + angle_diff(b.heading, a.heading) * f)


def delayed_view(buf: DelayBuffer, t: float) -> Pose2:
    """Pose at ``t - delay``: linear in position, shortest arc in heading."""
    if not buf.times:
        raise Underflow("empty delay buffer")
    q = t - buf.delay
    times = buf.times
    if q < times[0] - 1e-12:
        raise Underflow(f"query time {q} precedes buffer start {times[0]}")
    if q >= times[-1]:
        return buf.poses[-1]
    i = bisect.bisect_right(times, q)
    if i == 0:
        return buf.poses[0]
    t0, t1 = times[i - 1], times[i]
    return interpolate_pose(buf.poses[i - 1], buf.poses[i], (q - t0) / (t1 - t0))


def mask_check(robot_arrival: float, rendered_contact: float) -> bool:
    """The proxy is in place no later than the user sees the contact."""
    return robot_arrival <= rendered_contact + 1e-9


# -- replication trials --------------------------------------------------------------

def publish_due(tick: int, dt_us: int, period_us: int) -> bool:
    return tick == 0 or (tick * dt_us) // period_us > ((tick - 1) * dt_us) // period_us


@dataclass
class TrialResult:
    converged_after: float | None  # seconds after the last real update
    replicas_equal: bool
    delivered: dict = field(default_factory=dict)


def run_replication_trial(seed: int, drop: float = 0.2, jitter: float = 0.1,
                          base_latency: float = 0.1, n_entities: int = 4,
                          active: float = 3.0, settle: float = 1.0,
                          dt: float = 0.02) -> TrialResult:
    """Two rooms each own half the entities, move them for ``active`` seconds,
    then keep republishing at 20 Hz. Reports when both replicas agree on every pose."""
    rng = random.Random(seed)
    model = ChannelModel(base_latency, jitter, drop, seed)
    rooms = (1, 2)
    owner = {f"e{i}": rooms[i % 2] for i in range(n_entities)}
    truth = {e: Pose2.at(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-3, 3)) for e in owner}
    vel = {e: (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)) for e in owner}
    replicas = {r: Replica() for r in rooms}
    links = {r: Link(model, r) for r in rooms}
    seqs = {r: 0 for r in rooms}
    dt_us = to_micros(dt)
    period_us = to_micros(1.0 / REPUBLISH_HZ)
    last_update = 0.0
    converged_at = None
    n_ticks = int(round((active + settle) / dt))
    for tick in range(n_ticks + 1):
        now = tick * dt_us / 1_000_000
        if now <= active + 1e-9:
            for e in owner:
                p = truth[e].position
                truth[e] = Pose2.at(p.x + vel[e][0] * dt, p.y + vel[e][1] * dt, truth[e].heading)
            last_update = now
        if publish_due(tick, dt_us, period_us):
            for r in rooms:
                out = []
                for e in sorted(owner):
                    if owner[e] != r:
                        continue
                    seqs[r] += 1
                    env = Envelope(seqs[r], now, r, Kind.POSE_UPDATE, pose_body(e, truth[e]))
                    replicas[r].apply(snapshot_of(env))
                    out.append(env)
                for other in rooms:
                    if other != r:
                        links[other].send(out, now)
        for r in rooms:
            for env in links[r].receive(now):
                replicas[r].apply(snapshot_of(env))
        if now > active + 1e-9:
            same = replicas[1].poses() == replicas[2].poses() and len(replicas[1].snapshots) == n_entities
            if same and converged_at is None:
                converged_at = now
            elif not same:
                converged_at = None
    equal = replicas[1].poses() == replicas[2].poses()
    return TrialResult(None if converged_at is None else converged_at - last_update, equal)


def run_reliable_trial(seed: int, n_events: int = 20, drop: float = 0.2, jitter: float = 0.1,
                       base_latency: float = 0.1, dt: float = 0.02,
                       max_time: float = 60.0) -> tuple[list, list]:
    """Send ``n_events`` game events from room 1 to room 2; return (sent, delivered) bodies."""
    rng = random.Random(seed)
    model = ChannelModel(base_latency, jitter, drop, seed)
    to_rx, to_tx = Link(model, 2), Link(model, 1)
    tx, rx = ReliableSender(1), ReliableReceiver(2)
    send_at = sorted(rng.uniform(0.0, 3.0) for _ in range(n_events))
    sent, delivered = [], []
    dt_us = to_micros(dt)
    tick = 0
    while True:
        now = tick * dt_us / 1_000_000
        batch = []
        while send_at and send_at[0] <= now:
            send_at.pop(0)
            body = {"move": len(sent) + 1}
            sent.append(body)
            batch.append(tx.send(body, now))
        batch.extend(tx.poll(now))
        to_rx.send(batch, now)
        acks = []
        for env in to_rx.receive(now):
            got, ack = rx.receive(env, now)
            delivered.extend(got)
            acks.append(ack)
        to_tx.send(acks, now)
        for ack in to_tx.receive(now):
            tx.on_ack(ack)
        if not send_at and not tx.unacked:
            break
        if now > max_time:
            break
        tick += 1
    return sent, delivered
