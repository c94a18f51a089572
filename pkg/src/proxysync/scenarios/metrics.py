"""Aggregates read back from a scenario trace."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..geometry import Rect, RoomConfig, Vec2, world_transform
from ..sync import mask_check
from .engine import Trace
from .game import Mark, Outcome, replay
from .script import SEATS

ROUNDING_SLACK = 1e-5  # traces read back from text carry 6-decimal positions


@dataclass(frozen=True)
class Contact:
    room: int
    object_id: str
    proxy: int
    kind: str
    rendered: float
    arrival: float  # inf if the proxy never got there

    @property
    def lead(self) -> float:
        return self.rendered - self.arrival

    @property
    def masked(self) -> bool:
        return mask_check(self.arrival, self.rendered)


@dataclass
class Metrics:
    travel_times: list[float] = field(default_factory=list)
    contacts: list[Contact] = field(default_factory=list)
    binding_switches: int = 0
    gesture_outcomes: dict[int, bool] = field(default_factory=dict)
    violations: int = 0

    @property
    def lead_times(self) -> list[float]:
        return [c.lead for c in self.contacts]

    @property
    def mask_failures(self) -> int:
        return sum(not c.masked for c in self.contacts)

    @property
    def mean_travel_time(self) -> float | None:
        return sum(self.travel_times) / len(self.travel_times) if self.travel_times else None

    @property
    def mean_lead_time(self) -> float | None:
        leads = [x for x in self.lead_times if math.isfinite(x)]
        return sum(leads) / len(leads) if leads else None

    def summary(self) -> dict:
        out = {
            "moves": len(self.travel_times),
            "contacts": len(self.contacts),
            "mask_failures": self.mask_failures,
            "binding_switches": self.binding_switches,
            "violations": self.violations,
        }
        if self.travel_times:
            out["mean_travel_time"] = self.mean_travel_time
            out["max_travel_time"] = max(self.travel_times)
        finite = [x for x in self.lead_times if math.isfinite(x)]
        if finite:
            out["mean_lead_time"] = sum(finite) / len(finite)
            out["min_lead_time"] = min(finite)
        if len(finite) < len(self.contacts):
            out["unreached"] = len(self.contacts) - len(finite)
        if self.gesture_outcomes:
            out["tiles_ok"] = sum(self.gesture_outcomes.values())
            out["tiles_total"] = len(self.gesture_outcomes)
        return out


def robot_histories(trace: Trace) -> dict[int, list[tuple[float, float, float]]]:
    hist: dict[int, list] = {}
    for kind, f in trace.events:
        if kind == "proxy":
            hist[int(f["id"])] = [(0.0, float(f["x"]), float(f["y"]))]
        elif kind == "robot":
            h = hist.setdefault(int(f["id"]), [])
            if h and h[-1][0] == float(f["t"]):
                h[-1] = (float(f["t"]), float(f["x"]), float(f["y"]))
            else:
                h.append((float(f["t"]), float(f["x"]), float(f["y"])))
    return hist


def arrival_time(history, at: float, target, tol: float) -> float:
    """When the proxy came within ``tol`` of ``target`` for the stay covering ``at``.

    If it is not there at ``at``, the first later time it gets there; ``inf`` if never.
    """
    tol = tol + ROUNDING_SLACK
    near = [math.hypot(x - target[0], y - target[1]) <= tol for _, x, y in history]
    idx = None
    for i, (t, _, _) in enumerate(history):
        if t <= at + 1e-9:
            idx = i
    if idx is not None and near[idx]:
        while idx > 0 and near[idx - 1]:
            idx -= 1
        return history[idx][0]
    start = 0 if idx is None else idx + 1
    for i in range(start, len(history)):
        if near[i]:
            return history[i][0]
    return math.inf


def travel_times(trace: Trace) -> list[float]:
    """Duration of every robot move, from leaving rest to arriving."""
    moving = ("rotating", "translating")
    started: dict[int, float] = {}
    out = []
    for kind, f in trace.events:
        if kind != "robot":
            continue
        pid, status, t = int(f["id"]), f["status"], float(f["t"])
        if status in moving:
            started.setdefault(pid, t)
        elif status == "arrived" and pid in started:
            out.append(t - started.pop(pid))
        elif status != "arrived":
            started.pop(pid, None)
    return out


def compute_metrics(trace: Trace) -> Metrics:
    m = Metrics()
    hist = robot_histories(trace)
    m.travel_times = travel_times(trace)
    for kind, f in trace.events:
        if kind == "contact":
            pid = int(f["proxy"])
            t = float(f["t"])
            arrival = arrival_time(hist.get(pid, []), t, (float(f["x"]), float(f["y"])), float(f["tol"]))
            m.contacts.append(Contact(int(f["room"]), str(f["object"]), pid, str(f["kind"]), t, arrival))
        elif kind == "bind" and f["prev"] != "none":
            m.binding_switches += 1
        elif kind == "outcome":
            m.gesture_outcomes[int(f["expected"])] = bool(f["ok"])
        elif kind == "end":
            m.violations = int(f["violations"])
    return m


# -- trace checks used by the acceptance suite ---------------------------------------

def _room_frames(trace: Trace) -> dict[int, tuple]:
    frames = {}
    for kind, f in trace.events:
        if kind == "room":
            cfg = RoomConfig(int(f["id"]), Rect(float(f["half_width"]), float(f["half_depth"])),
                             SEATS[str(f["seat"])])
            frames[cfg.room_id] = (cfg, world_transform(cfg, bool(f["opposite"])).inverse())
    return frames


def tracking_errors(trace: Trace, policy: str = "many_to_one") -> list[tuple[float, int, float]]:
    """``(t, proxy, error)`` at every tick a proxy of ``policy`` is engaged.

    The error is the distance between the proxy and its object's rendered pose
    in that room, mapped into the room's table frame.
    """
    frames = _room_frames(trace)
    robots, bound, view, engaged = {}, {}, {}, {}
    out = []

    def check(t):
        for pid, (rid, oid) in bound.items():
            if not engaged.get(pid) or (rid, oid) not in view:
                continue
            cfg, inv = frames[rid]
            target = cfg.table.clamp(inv.apply(view[(rid, oid)]))
            x, y = robots[pid]
            out.append((t, pid, math.hypot(x - target.x, y - target.y)))

    t_prev = None
    for kind, f in trace.events:
        if kind == "proxy" and f["policy"] == policy:
            bound[int(f["id"])] = (int(f["room"]), str(f["object"]))
            robots[int(f["id"])] = (float(f["x"]), float(f["y"]))
        elif kind == "tick":
            if t_prev is not None:
                check(t_prev)
            t_prev = float(f["t"])
        elif kind == "robot":
            robots[int(f["id"])] = (float(f["x"]), float(f["y"]))
        elif kind == "view":
            view[(int(f["room"]), str(f["object"]))] = Vec2(float(f["x"]), float(f["y"]))
        elif kind == "binding":
            engaged[int(f["proxy"])] = f["state"] == "engaged"
    if t_prev is not None:
        check(t_prev)
    return out


def game_record(trace: Trace, room: int | None = None) -> tuple[list[tuple[int, Mark]], Outcome | None]:
    """Moves played (as seen by ``room``, default the first room) and the winner it announced."""
    rooms = [int(f["id"]) for f in trace.of_kind("room")]
    room = rooms[0] if room is None else room
    moves = [(int(f["cell"]), Mark(str(f["mark"]))) for f in trace.of_kind("game") if int(f["room"]) == room]
    winners = [Outcome(str(f["outcome"])) for f in trace.of_kind("winner") if int(f["room"]) == room]
    return moves, (winners[0] if winners else None)


def replay_game(trace: Trace, room: int | None = None):
    """Replays the room's moves from an empty board; raises on any illegal move."""
    moves, announced = game_record(trace, room)
    board, outcome = replay(moves)
    return board, outcome, announced
