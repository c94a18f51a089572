"""Palm-aim targeting and hand-motion commands for moving a mug without touching it.

A user aims their palm at an object (it shakes), holds the aim for a dwell
time (it glows and is locked), then pushes, pulls or slides their wrist.
Destinations snap to the 3x3 tile grid of the shared workspace.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DegenerateAxis
from .geometry import SharedWorkspace, Vec2, tile_center, tile_grid, tile_of

DWELL_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class WristSample:
    time: float
    position: Vec2
    palm_dir: Vec2
    yaw: float = 0.0


@dataclass(frozen=True, slots=True)
class GestureConfig:
    aim_half_angle: float = 0.26
    dwell_target: float = 0.5
    v_thresh: float = 0.3
    window: float = 0.3
    reach: float = 0.15

    def __post_init__(self):
        for name in ("aim_half_angle", "dwell_target", "v_thresh", "window", "reach"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


class Phase(str, enum.Enum):
    IDLE = "idle"
    TARGETING = "targeting"  # object shakes
    LOCKED = "locked"        # object glows
    GRABBING = "grabbing"


@dataclass(frozen=True, slots=True)
class GestureState:
    phase: Phase = Phase.IDLE
    object_id: str | None = None
    dwell_elapsed: float = 0.0


IDLE = GestureState()


class CommandKind(str, enum.Enum):
    PUSH = "push"
    PULL = "pull"
    SLIDE = "slide"
    GRAB = "grab"
    RELEASE = "release"


@dataclass(frozen=True, slots=True)
class GestureCommand:
    kind: CommandKind
    direction: Vec2 | None = None

    def negated(self) -> "GestureCommand":
        if self.kind is CommandKind.PUSH:
            return GestureCommand(CommandKind.PULL)
        if self.kind is CommandKind.PULL:
            return GestureCommand(CommandKind.PUSH)
        if self.kind is CommandKind.SLIDE:
            return GestureCommand(CommandKind.SLIDE, -self.direction)
        return self


class EventKind(str, enum.Enum):
    SHAKE = "shake"
    GLOW = "glow"
    COMMAND = "command"
    GRAB = "grab"
    RELEASE = "release"


@dataclass(frozen=True, slots=True)
class GestureEvent:
    kind: EventKind
    object_id: str
    command: GestureCommand | None = None
    destination: Vec2 | None = None


def _xy(p) -> Vec2:
    return p.position if hasattr(p, "position") else Vec2(p[0], p[1])


def aimed_objects(sample: WristSample, objects: Mapping[str, object], cfg: GestureConfig) -> list[str]:
    """Objects inside the palm cone, nearest first."""
    cos_lim = math.cos(cfg.aim_half_angle)
    hits = []
    w = sample.position
    for oid, obj in objects.items():
        rel = _xy(obj) - w
        d = rel.norm()
        if d < 1e-9:
            continue
        if rel.dot(sample.palm_dir) / d >= cos_lim:
            hits.append((d, oid))
    hits.sort()
    return [oid for _, oid in hits]


def update_targeting(state: GestureState, sample: WristSample, objects: Mapping[str, object],
                     cfg: GestureConfig, dt: float) -> tuple[GestureState, list[GestureEvent]]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if state.phase is Phase.GRABBING:
        return state, []
    aimed = aimed_objects(sample, objects, cfg)
    if state.phase is Phase.IDLE:
        if aimed:
            return GestureState(Phase.TARGETING, aimed[0]), [GestureEvent(EventKind.SHAKE, aimed[0])]
        return state, []
    if state.phase is Phase.TARGETING:
        if state.object_id in aimed:
            dwell = state.dwell_elapsed + dt
            if dwell + DWELL_EPS >= cfg.dwell_target:
                return GestureState(Phase.LOCKED, state.object_id), [GestureEvent(EventKind.GLOW, state.object_id)]
            return GestureState(Phase.TARGETING, state.object_id, dwell), []
        if aimed:
            return GestureState(Phase.TARGETING, aimed[0]), [GestureEvent(EventKind.SHAKE, aimed[0])]
        # no partial credit for broken aim
        return IDLE, []
    # locked: only an explicit aim at something else releases the lock
    if aimed and state.object_id not in aimed:
        return GestureState(Phase.TARGETING, aimed[0]), [GestureEvent(EventKind.SHAKE, aimed[0])]
    return state, []


def mean_velocity(window: Sequence[WristSample]) -> Vec2:
    first, last = window[0], window[-1]
    span = last.time - first.time
    if span <= 0:
        return Vec2(0.0, 0.0)
    return (last.position - first.position).scale(1.0 / span)


def classify_motion(window: Sequence[WristSample], user_pos, object_pos,
                    cfg: GestureConfig) -> GestureCommand | None:
    """Push/pull along the user-to-object axis, slide across it, or nothing."""
    axis = Vec2(object_pos[0] - user_pos[0], object_pos[1] - user_pos[1])
    n = axis.norm()
    if n < 1e-6:
        raise DegenerateAxis("object coincides with the user")
    if len(window) < 2 or window[-1].time - window[0].time < cfg.window - 1e-9:
        return None
    a = axis.scale(1.0 / n)
    v = mean_velocity(window)
    radial = v.dot(a)
    lateral = v - a.scale(radial)
    if radial > cfg.v_thresh:
        return GestureCommand(CommandKind.PUSH)
    if radial < -cfg.v_thresh:
        return GestureCommand(CommandKind.PULL)
    if lateral.norm() > cfg.v_thresh:
        return GestureCommand(CommandKind.SLIDE, lateral.normalized())
    return None


def _ray_span(origin: Vec2, direction: Vec2, ws: SharedWorkspace) -> tuple[float, float] | None:
    """Entry and exit parameters of the ray inside the workspace bounds."""
    lo, hi = -math.inf, math.inf
    for o, d, half in ((origin.x, direction.x, ws.bounds.half_width),
                       (origin.y, direction.y, ws.bounds.half_depth)):
        if abs(d) < 1e-15:
            if abs(o) > half:
                return None
            continue
        s1, s2 = (-half - o) / d, (half - o) / d
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if lo > hi or hi < 0:
        return None
    return max(lo, 0.0), hi


_NUDGE = 1e-6


def command_target(cmd: GestureCommand, object_pos, user_pos, ws: SharedWorkspace) -> Vec2:
    obj = ws.bounds.clamp(object_pos)
    if cmd.kind is CommandKind.SLIDE:
        row, col = tile_grid(tile_of(obj, ws))
        ang = math.atan2(cmd.direction[1], cmd.direction[0])
        k = round(ang / (math.pi / 4))
        dcol = round(math.cos(k * math.pi / 4))
        drow = -round(math.sin(k * math.pi / 4))  # +y is the far row (row 0)
        row = min(max(row + drow, 0), 2)
        col = min(max(col + dcol, 0), 2)
        return tile_center(row * 3 + col + 1, ws)
    if cmd.kind not in (CommandKind.PUSH, CommandKind.PULL):
        raise ValueError(f"{cmd.kind.value} has no destination")
    user = Vec2(user_pos[0], user_pos[1])
    axis = obj - user
    if axis.norm() < 1e-9:
        raise DegenerateAxis("object coincides with the user")
    a = axis.normalized()
    span = _ray_span(user, a, ws)
    if span is None:
        return tile_center(tile_of(obj, ws), ws)
    s_in, s_out = span
    s = s_out - _NUDGE if cmd.kind is CommandKind.PUSH else s_in + _NUDGE
    return tile_center(tile_of(ws.bounds.clamp(user + a.scale(s)), ws), ws)


def grab_check(wrist, object_pos, cfg: GestureConfig) -> bool:
    return math.hypot(wrist[0] - object_pos[0], wrist[1] - object_pos[1]) <= cfg.reach


@dataclass
class GestureMachine:
    """One user's targeting state plus the wrist samples gathered while locked."""

    user: int
    cfg: GestureConfig = field(default_factory=GestureConfig)
    state: GestureState = IDLE
    window: deque = field(default_factory=deque)

    def feed(self, sample: WristSample, objects: Mapping[str, object], dt: float,
             user_pos, ws: SharedWorkspace) -> list[GestureEvent]:
        before = self.state
        self.state, events = update_targeting(self.state, sample, objects, self.cfg, dt)
        if self.state.phase is not Phase.LOCKED or before.phase is not Phase.LOCKED \
                or before.object_id != self.state.object_id:
            self.window.clear()
        if self.state.phase is not Phase.LOCKED:
            return events
        self.window.append(sample)
        while len(self.window) > 2 and sample.time - self.window[1].time >= self.cfg.window - 1e-9:
            self.window.popleft()
        oid = self.state.object_id
        if oid not in objects:
            # the locked object left view (taken by someone else); drop the lock
            self.state = IDLE
            self.window.clear()
            return events
        obj = _xy(objects[oid])
        cmd = classify_motion(list(self.window), user_pos, obj, self.cfg)
        if cmd is None:
            return events
        dest = command_target(cmd, obj, user_pos, ws)
        self.state = IDLE
        self.window.clear()
        return events + [GestureEvent(EventKind.COMMAND, oid, cmd, dest)]

    def grab(self, object_id: str) -> GestureEvent:
        self.state = GestureState(Phase.GRABBING, object_id)
        self.window.clear()
        return GestureEvent(EventKind.GRAB, object_id)

    def release(self) -> GestureEvent | None:
        if self.state.phase is not Phase.GRABBING:
            return None
        oid = self.state.object_id
        self.state = IDLE
        return GestureEvent(EventKind.RELEASE, oid)
