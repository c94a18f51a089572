"""Brute-force analysis oracles for test pipelines.

* assignment: the makespan-optimal proxy-to-demand pairing, by enumeration;
* masking: the smallest rendering delay that covers every commanded move,
  i.e. the largest ``travel_time_bound`` among them.

Both read and write canonical records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import records
from .geometry import Pose2, Vec2, shared_workspace, tile_center
from .mapping import DemandPoint, optimal_assignment
from .proxy import DEFAULT_LIMITS, RobotLimits, RobotState, travel_time_bound
from .scenarios.builtin import DEFAULT_ROOMS, MUG_FIXTURES, room_local
from .scenarios.metrics import robot_histories


@dataclass(frozen=True)
class Move:
    start: Pose2  # proxy pose when the move is commanded (table frame)
    goal: Vec2
    room: int = 1


def parse_assignment_input(text: str) -> tuple[list[DemandPoint], dict[int, Vec2]]:
    """``proxy id= x= y=`` and ``demand object= x= y=`` records."""
    demands, pool = [], {}
    for lineno, kind, f in records.iter_records(text.splitlines()):
        try:
            if kind == "proxy":
                pool[int(f["id"])] = Vec2(float(f["x"]), float(f["y"]))
            elif kind == "demand":
                demands.append(DemandPoint(str(f["object"]), Vec2(float(f["x"]), float(f["y"]))))
            else:
                raise ValueError(f"unexpected record {kind!r}")
        except (KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return demands, pool


def assignment_report(demands: Sequence[DemandPoint], pool: dict) -> list[str]:
    bindings, cost = optimal_assignment(demands, pool)
    out = [records.format_record("assign", {"object": b.object_id, "proxy": b.proxy_id}) for b in bindings]
    out.append(records.format_record("assignment", {"demands": len(demands), "proxies": len(pool),
                                                    "makespan": float(cost)}))
    return out


def move_bounds(moves: Iterable[Move], limits: RobotLimits = DEFAULT_LIMITS) -> list[float]:
    return [travel_time_bound(RobotState(m.start), m.goal, limits) for m in moves]


def minimal_delay(moves: Sequence[Move], limits: RobotLimits = DEFAULT_LIMITS) -> float:
    """Smallest delay for which every move fits inside its masking window."""
    bounds = move_bounds(moves, limits)
    return max(bounds) if bounds else 0.0


def demo_moves() -> list[Move]:
    """Every move the mug-passing fixtures command, as seen by each room's proxy."""
    ws = shared_workspace(DEFAULT_ROOMS)
    out = []
    for target, (start, _, _) in sorted(MUG_FIXTURES.items()):
        a, b = tile_center(start, ws), tile_center(target, ws)
        for i, room in enumerate(DEFAULT_ROOMS):
            out.append(Move(Pose2(room_local(room, a, i == 0)), room_local(room, b, i == 0), room.room_id))
    return out


def moves_from_trace(trace) -> list[Move]:
    """Landing contacts in a scenario trace, as (proxy pose at move start, contact target)."""
    hist = robot_histories(trace)
    headings: dict[int, list] = {}
    for kind, f in trace.events:
        if kind in ("proxy", "robot"):
            headings.setdefault(int(f["id"]), []).append((float(f.get("t", 0.0)), float(f["heading"])))
    out = []
    for f in trace.of_kind("contact"):
        if f["kind"] != "landing":
            continue
        pid, start = int(f["proxy"]), float(f["start"])
        pos = [p for p in hist[pid] if p[0] <= start + 1e-9][-1]
        head = [h for h in headings[pid] if h[0] <= start + 1e-9][-1][1]
        out.append(Move(Pose2.at(pos[1], pos[2], head), Vec2(float(f["x"]), float(f["y"])), int(f["room"])))
    return out


def parse_moves(text: str) -> tuple[list[Move], RobotLimits]:
    """``move x0= y0= heading= x= y= [room=]`` records plus an optional ``limits`` record."""
    moves, limits = [], DEFAULT_LIMITS
    for lineno, kind, f in records.iter_records(text.splitlines()):
        try:
            if kind == "move":
                moves.append(Move(Pose2.at(float(f["x0"]), float(f["y0"]), float(f.get("heading", 0.0))),
                                  Vec2(float(f["x"]), float(f["y"])), int(f.get("room", 1))))
            elif kind == "limits":
                limits = RobotLimits(**{k: float(v) for k, v in f.items()})
            else:
                raise ValueError(f"unexpected record {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return moves, limits


def masking_report(moves: Sequence[Move], limits: RobotLimits = DEFAULT_LIMITS) -> list[str]:
    out = []
    bounds = move_bounds(moves, limits)
    for m, b in zip(moves, bounds):
        out.append(records.format_record("move", {
            "room": m.room, "x0": m.start.position.x, "y0": m.start.position.y, "heading": m.start.heading,
            "x": m.goal.x, "y": m.goal.y, "bound": b}))
    out.append(records.format_record("masking", {"moves": len(moves), "min_delay": max(bounds) if bounds else 0.0}))
    return out
