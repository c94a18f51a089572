"""Kinematic tabletop robot and its go-to-target controller."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from itertools import combinations

from .errors import CommandOutOfLimits
from .geometry import Pose2, Vec2, angle_diff

DT = 0.02
SETTLE_MARGIN = 0.1
MIN_SEPARATION = 0.06


class RobotStatus(str, enum.Enum):
    IDLE = "idle"
    ROTATING = "rotating"
    TRANSLATING = "translating"
    ARRIVED = "arrived"
    CARRYING = "carrying"


@dataclass(frozen=True, slots=True)
class RobotLimits:
    v_max: float = 0.5
    w_max: float = 2.0 * math.pi
    arrive_pos_tol: float = 0.01
    arrive_heading_tol: float = 0.1
    # proportional gains of the translate phase
    distance_gain: float = 10.0
    heading_gain: float = 10.0

    def __post_init__(self):
        for name in ("v_max", "w_max", "arrive_pos_tol", "arrive_heading_tol",
                     "distance_gain", "heading_gain"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_LIMITS = RobotLimits()


@dataclass(frozen=True, slots=True)
class RobotState:
    pose: Pose2
    status: RobotStatus = RobotStatus.IDLE

    @property
    def position(self) -> Vec2:
        return self.pose.position


@dataclass(frozen=True, slots=True)
class MotionCommand:
    v: float = 0.0
    w: float = 0.0

    def within(self, lim: RobotLimits, tol: float = 1e-12) -> bool:
        return abs(self.v) <= lim.v_max + tol and abs(self.w) <= lim.w_max + tol


STOP = MotionCommand(0.0, 0.0)


def step_robot(s: RobotState, c: MotionCommand, dt: float,
               lim: RobotLimits = DEFAULT_LIMITS) -> RobotState:
    """Semi-implicit unicycle step: turn first, then advance along the new heading."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not c.within(lim):
        raise CommandOutOfLimits(f"command {c} exceeds limits v_max={lim.v_max}, w_max={lim.w_max}")
    if c.v == 0.0 and c.w == 0.0:
        return s
    heading = s.pose.heading + c.w * dt
    p = s.pose.position
    step = c.v * dt
    pose = Pose2(Vec2(p.x + step * math.cos(heading), p.y + step * math.sin(heading)), heading)
    return RobotState(pose, s.status)


def drive_to(s: RobotState, target, lim: RobotLimits = DEFAULT_LIMITS) -> tuple[MotionCommand, RobotStatus]:
    """Rotate in place until facing the target, then drive with a proportional slowdown.

    Returns the command together with the status the robot should take on.
    A carried robot is never actuated.
    """
    if s.status is RobotStatus.CARRYING:
        return STOP, RobotStatus.CARRYING
    p = s.pose.position
    dx, dy = target[0] - p.x, target[1] - p.y
    dist = math.hypot(dx, dy)
    if dist <= lim.arrive_pos_tol:
        return STOP, RobotStatus.ARRIVED
    err = angle_diff(math.atan2(dy, dx), s.pose.heading)
    if abs(err) > lim.arrive_heading_tol:
        return MotionCommand(0.0, math.copysign(lim.w_max, err)), RobotStatus.ROTATING
    v = min(lim.v_max, lim.distance_gain * dist)
    w = max(-lim.w_max, min(lim.w_max, lim.heading_gain * err))
    return MotionCommand(v, w), RobotStatus.TRANSLATING


def travel_time_bound(s: RobotState, target, lim: RobotLimits = DEFAULT_LIMITS) -> float:
    """Conservative arrival time: a half turn, the straight run at top speed, two settle margins."""
    dist = s.pose.position.dist(target)
    if dist <= lim.arrive_pos_tol:
        return 2.0 * SETTLE_MARGIN
    return math.pi / lim.w_max + dist / lim.v_max + 2.0 * SETTLE_MARGIN


def simulate_arrival(s: RobotState, target, lim: RobotLimits = DEFAULT_LIMITS,
                     dt: float = DT, max_time: float = 60.0) -> tuple[float, list[RobotState]]:
    """Drive ``s`` to ``target`` and report the arrival time and the trajectory."""
    t = 0.0
    traj = [s]
    steps = 0
    while True:
        cmd, status = drive_to(s, target, lim)
        s = replace(s, status=status)
        if status is RobotStatus.ARRIVED:
            traj[-1] = s
            return t, traj
        if t > max_time:
            raise RuntimeError(f"robot did not arrive within {max_time} s")
        s = step_robot(s, cmd, dt, lim)
        steps += 1
        t = steps * dt
        traj.append(s)


def proximity_violations(positions: dict, min_separation: float = MIN_SEPARATION) -> list[tuple]:
    """Pairs of robots closer than the safety distance (flagged, not resolved)."""
    bad = []
    for (a, pa), (b, pb) in combinations(sorted(positions.items()), 2):
        d = math.hypot(pa[0] - pb[0], pa[1] - pb[1])
        if d < min_separation:
            bad.append((a, b, d))
    return bad

