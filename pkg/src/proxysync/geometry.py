"""Planar frames on the table surface.

Each room's table is localized into a shared frame in which the seated user
sits at the canonical "south" seat (angle -pi/2). Proxies operate inside the
minimum boundary: the intersection of every room's table after localization.
The shared rectangle is split into a 3x3 grid of tiles numbered 1..9 from the
south user's point of view, far row first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import BadTileIndex, EmptyRoomSet, NonCardinalRotation

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
CANONICAL_SEAT = -HALF_PI
CARDINAL_TOL = 1e-9


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(a, TWO_PI)
    return math.pi if a <= -math.pi else a


def angle_diff(a: float, b: float) -> float:
    """Shortest signed arc from ``b`` to ``a``."""
    return normalize_angle(a - b)


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, o):  # type: ignore[override]
        return Vec2(self.x + o[0], self.y + o[1])

    def __sub__(self, o):
        return Vec2(self.x - o[0], self.y - o[1])

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def scale(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def dot(self, o) -> float:
        return self.x * o[0] + self.y * o[1]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, o) -> float:
        return math.hypot(self.x - o[0], self.y - o[1])

    def normalized(self) -> "Vec2":
        n = math.hypot(self.x, self.y)
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize zero vector")
        return Vec2(self.x / n, self.y / n)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True, slots=True)
class Pose2:
    position: Vec2
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", Vec2(*self.position))
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @classmethod
    def at(cls, x: float, y: float, heading: float = 0.0) -> "Pose2":
        return cls(Vec2(x, y), heading)


@dataclass(frozen=True, slots=True)
class RigidTransform2:
    """``p -> R(rotation) p + translation``."""

    rotation: float = 0.0
    translation: Vec2 = Vec2(0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "rotation", normalize_angle(self.rotation))
        object.__setattr__(self, "translation", Vec2(*self.translation))

    def apply(self, p) -> Vec2:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        x, y = p[0], p[1]
        return Vec2(c * x - s * y + self.translation.x, s * x + c * y + self.translation.y)

    def apply_pose(self, pose: Pose2) -> Pose2:
        return Pose2(self.apply(pose.position), pose.heading + self.rotation)

    def inverse(self) -> "RigidTransform2":
        back = (-self.translation).rotated(-self.rotation)
        return RigidTransform2(-self.rotation, back)

    def compose(self, other: "RigidTransform2") -> "RigidTransform2":
        """``self o other``: apply ``other`` first."""
        return RigidTransform2(self.rotation + other.rotation, self.apply(other.translation))


IDENTITY = RigidTransform2()


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle centered on the frame origin."""

    half_width: float
    half_depth: float

    def __post_init__(self):
        if not (self.half_width > 0 and self.half_depth > 0):
            raise ValueError(f"rect extents must be positive: {self.half_width}, {self.half_depth}")

    def contains(self, p, tol: float = 0.0) -> bool:
        return abs(p[0]) <= self.half_width + tol and abs(p[1]) <= self.half_depth + tol

    def clamp(self, p) -> Vec2:
        return Vec2(
            min(max(p[0], -self.half_width), self.half_width),
            min(max(p[1], -self.half_depth), self.half_depth),
        )

    def corners(self) -> list[Vec2]:
        w, d = self.half_width, self.half_depth
        return [Vec2(-w, -d), Vec2(w, -d), Vec2(w, d), Vec2(-w, d)]


@dataclass(frozen=True, slots=True)
class RoomConfig:
    room_id: int
    table: Rect
    seat_angle: float = CANONICAL_SEAT

    def __post_init__(self):
        object.__setattr__(self, "seat_angle", normalize_angle(self.seat_angle))


@dataclass(frozen=True, slots=True)
class SharedWorkspace:
    bounds: Rect


def quarter_turns(rotation: float) -> int:
    """Number of quarter turns in ``rotation``; rejects anything off-cardinal."""
    q = round(rotation / HALF_PI)
    if abs(rotation - q * HALF_PI) > CARDINAL_TOL:
        raise NonCardinalRotation(f"rotation {rotation!r} is not a multiple of pi/2")
    return q % 4


def localize_room(config: RoomConfig) -> RigidTransform2:
    """Local-to-shared transform putting the room's seat at the canonical south seat."""
    return RigidTransform2(CANONICAL_SEAT - config.seat_angle, Vec2(0.0, 0.0))


def transformed_extents(table: Rect, t: RigidTransform2) -> Rect:
    if quarter_turns(t.rotation) % 2:
        return Rect(table.half_depth, table.half_width)
    return Rect(table.half_width, table.half_depth)


def shared_workspace(rooms: Sequence[RoomConfig]) -> SharedWorkspace:
    if not rooms:
        raise EmptyRoomSet("shared workspace needs at least one room")
    extents = [transformed_extents(r.table, localize_room(r)) for r in rooms]
    return SharedWorkspace(
        Rect(min(e.half_width for e in extents), min(e.half_depth for e in extents))
    )


def clamp_to_workspace(p, ws: SharedWorkspace) -> Vec2:
    return ws.bounds.clamp(p)


def _band(value: float, half: float) -> int:
    """0, 1, 2 for the low, middle, high third of [-half, half]."""
    k = int((value + half) / (2.0 * half / 3.0))
    return min(max(k, 0), 2)


def tile_of(p, ws: SharedWorkspace) -> int:
    b = ws.bounds
    col = _band(p[0], b.half_width)
    row = 2 - _band(p[1], b.half_depth)  # far (+y) row first
    return row * 3 + col + 1


def tile_grid(i: int) -> tuple[int, int]:
    """(row, col) of tile ``i``; row 0 is the far row, col 0 the left column."""
    if not isinstance(i, int) or not 1 <= i <= 9:
        raise BadTileIndex(f"tile index must be 1..9, got {i!r}")
    return divmod(i - 1, 3)


def tile_center(i: int, ws: SharedWorkspace) -> Vec2:
    row, col = tile_grid(i)
    b = ws.bounds
    return Vec2((col - 1) * 2.0 * b.half_width / 3.0, (1 - row) * 2.0 * b.half_depth / 3.0)


def seat_position(ws: SharedWorkspace, offset: float = 0.2) -> Vec2:
    """Where the canonical south user sits, ``offset`` beyond the near edge."""
    return Vec2(0.0, -ws.bounds.half_depth - offset)


def world_transform(config: RoomConfig, opposite: bool = False) -> RigidTransform2:
    """Local-to-world transform. Partners sit opposite: their canonical frame is turned a half turn."""
    loc = localize_room(config)
    return RigidTransform2(math.pi, Vec2(0.0, 0.0)).compose(loc) if opposite else loc
