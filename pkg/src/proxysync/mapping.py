"""Object-to-proxy bindings under the three mapping policies.

* one-to-one: a proxy sits under its object in one room;
* many-to-one: one shared object mirrored by a proxy in every room;
* one-to-many: a small pool of proxies relocates to whichever object is in demand.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .errors import EmptyPool, MissingRoomProxy, OracleTooLarge, UnboundObject
from .geometry import Pose2, RoomConfig, Vec2, localize_room

ORACLE_MAX_POOL = 6
DEFAULT_MARGIN = 0.05


class BindingState(str, enum.Enum):
    PENDING = "pending"
    ENGAGED = "engaged"


class DemandSource(str, enum.Enum):
    HAND_PROXIMITY = "hand_proximity"
    GESTURE_COMMAND = "gesture_command"
    REMOTE_OBJECT = "remote_object"


@dataclass(frozen=True, slots=True)
class Binding:
    object_id: str
    proxy_id: int
    room_id: int = 1
    state: BindingState = BindingState.PENDING


@dataclass(frozen=True, slots=True)
class DemandPoint:
    object_id: str
    position: Vec2
    source: DemandSource = DemandSource.HAND_PROXIMITY


@dataclass(frozen=True)
class OneToOne:
    pairs: Mapping[str, int]  # object_id -> proxy_id


@dataclass(frozen=True)
class ManyToOne:
    object_id: str
    proxies: Mapping[int, int]  # room_id -> proxy_id


@dataclass(frozen=True)
class OneToMany:
    objects: frozenset
    pool: tuple
    hysteresis_margin: float = DEFAULT_MARGIN


MappingPolicy = OneToOne | ManyToOne | OneToMany


def validate_policies(policies: Iterable[MappingPolicy]) -> None:
    """A proxy may appear in at most one binding across all policies."""
    seen: set[int] = set()
    for pol in policies:
        if isinstance(pol, OneToOne):
            ids = list(pol.pairs.values())
        elif isinstance(pol, ManyToOne):
            ids = list(pol.proxies.values())
        else:
            ids = list(pol.pool)
        for pid in ids:
            if pid in seen:
                raise ValueError(f"proxy {pid} appears in more than one binding")
            seen.add(pid)


def one_to_one_target(object_pose: Pose2, room: RoomConfig) -> Vec2:
    """Object position (shared frame) expressed in the room's table frame, clamped to the table."""
    local = localize_room(room).inverse().apply(object_pose.position)
    return room.table.clamp(local)


def bound_target(policy: OneToOne, object_id: str, object_pose: Pose2, room: RoomConfig) -> Vec2:
    if object_id not in policy.pairs:
        raise UnboundObject(f"object {object_id!r} has no proxy")
    return one_to_one_target(object_pose, room)


def many_to_one_targets(object_pose: Pose2, rooms: Sequence[RoomConfig],
                        proxies: Mapping[int, int] | None = None) -> dict[int, Vec2]:
    """Per-room proxy targets mirroring one shared object."""
    if proxies is not None:
        missing = [r.room_id for r in rooms if r.room_id not in proxies]
        if missing:
            raise MissingRoomProxy(f"rooms without a proxy: {missing}")
    return {r.room_id: one_to_one_target(object_pose, r) for r in rooms}


def _pos(p) -> Vec2:
    return p.position if hasattr(p, "position") else Vec2(p[0], p[1])


def dispatch_one_to_many(demands: Sequence[DemandPoint], pool: Mapping[int, object],
                         current: Iterable[Binding] = (), margin: float = DEFAULT_MARGIN,
                         room_id: int = 1) -> tuple[list[Binding], list[str]]:
    """Serve demands in order with the nearest free proxy, keeping bindings sticky.

    ``pool`` maps proxy id to a position (or anything with ``.position``).
    An existing binding survives unless another free proxy is closer by more
    than ``margin``. Returns the new bindings and the object ids left queued.
    """
    if not pool:
        raise EmptyPool("dispatch needs at least one proxy")
    positions = {pid: _pos(p) for pid, p in pool.items()}
    held = {b.object_id: b for b in current}
    free = sorted(positions)
    out: list[Binding] = []
    queued: list[str] = []
    for d in demands:
        if not free:
            queued.append(d.object_id)
            continue
        best = min(free, key=lambda pid: (positions[pid].dist(d.position), pid))
        prev = held.get(d.object_id)
        if prev is not None and prev.proxy_id in free and prev.proxy_id != best:
            gain = positions[prev.proxy_id].dist(d.position) - positions[best].dist(d.position)
            if gain <= margin:
                best = prev.proxy_id
        if prev is not None and prev.proxy_id == best:
            out.append(replace(prev, room_id=room_id))
        else:
            out.append(Binding(d.object_id, best, room_id))
        free.remove(best)
    out = _settle_free(_repair_bottleneck(out, demands, positions), demands, positions, margin)
    kept = _retained(current, out, demands, positions, margin, room_id)
    return (kept if kept is not None else out), queued


def _free_gain(b: Binding, where, positions, used, margin: float):
    """A free proxy closer to ``b``'s demand by more than ``margin``, if any."""
    here = positions[b.proxy_id].dist(where[b.object_id])
    best = None
    for pid in sorted(positions):
        if pid in used:
            continue
        d = positions[pid].dist(where[b.object_id])
        if here - d > margin and (best is None or d < best[0]):
            best = (d, pid)
    return best


def _settle_free(bindings: list[Binding], demands, positions, margin: float) -> list[Binding]:
    # moving a demand to a nearer idle proxy never raises the makespan
    where = {d.object_id: d.position for d in demands}
    out = list(bindings)
    changed = True
    while changed:
        changed = False
        used = {b.proxy_id for b in out}
        for i, b in enumerate(out):
            better = _free_gain(b, where, positions, used, margin)
            if better is not None:
                out[i] = Binding(b.object_id, better[1], b.room_id)
                changed = True
                break
    return out


def _retained(current: Iterable[Binding], candidate: list[Binding], demands, positions,
              margin: float, room_id: int) -> list[Binding] | None:
    """The current binding set, if it still serves the same demands well enough."""
    served = {b.object_id for b in candidate}
    cur = [b for b in current if b.object_id in served]
    if {b.object_id for b in cur} != served or len(cur) != len(served):
        return None
    used = {b.proxy_id for b in cur}
    if len(used) != len(cur) or not used <= set(positions):
        return None
    where = {d.object_id: d.position for d in demands}
    if any(_free_gain(b, where, positions, used, margin) for b in cur):
        return None
    # the candidate is bottleneck-optimal, so this also caps the kept set at twice the optimum
    best = makespan(candidate, demands, positions)
    if makespan(cur, demands, positions) > min(best + margin, 2.0 * best):
        return None
    order = {b.object_id: i for i, b in enumerate(candidate)}
    cur.sort(key=lambda b: order[b.object_id])
    return [b if b.room_id == room_id else replace(b, room_id=room_id) for b in cur]


def _augment(i: int, dist, order, owner: dict, limit: float, seen: set) -> bool:
    for pid in order[i]:
        if dist[i][pid] >= limit or pid in seen:
            continue
        seen.add(pid)
        j = owner.get(pid)
        if j is None or _augment(j, dist, order, owner, limit, seen):
            owner[pid] = i
            return True
    return False


def _repair_bottleneck(bindings: list[Binding], demands: Sequence[DemandPoint],
                       positions: Mapping[int, Vec2]) -> list[Binding]:
    """Lower the worst proxy trip while any re-matching under a stricter threshold exists.

    Starts from the greedy bindings and only re-routes demands along augmenting
    paths, so bindings that are not part of the bottleneck stay put.
    """
    if not bindings:
        return bindings
    where = {d.object_id: d.position for d in demands}
    served = [b.object_id for b in bindings]
    dist = [{pid: p.dist(where[o]) for pid, p in positions.items()} for o in served]
    order = [sorted(positions, key=lambda pid, row=row: (row[pid], pid)) for row in dist]
    owner = {b.proxy_id: i for i, b in enumerate(bindings)}
    while True:
        limit = max(dist[i][pid] for pid, i in owner.items())
        trial = {pid: i for pid, i in owner.items() if dist[i][pid] < limit}
        matched = set(trial.values())
        ok = all(i in matched or _augment(i, dist, order, trial, limit, set())
                 for i in range(len(served)))
        if not ok:
            break
        owner = trial
    by_demand = {i: pid for pid, i in owner.items()}
    out = []
    for i, b in enumerate(bindings):
        pid = by_demand[i]
        out.append(b if pid == b.proxy_id else Binding(b.object_id, pid, b.room_id))
    return out


def makespan(bindings: Iterable[Binding], demands: Sequence[DemandPoint],
             pool: Mapping[int, object]) -> float:
    """Largest proxy-to-demand distance under ``bindings``."""
    where = {d.object_id: d.position for d in demands}
    dists = [_pos(pool[b.proxy_id]).dist(where[b.object_id]) for b in bindings]
    return max(dists, default=0.0)


def optimal_assignment(demands: Sequence[DemandPoint], pool: Mapping[int, object],
                       room_id: int = 1) -> tuple[list[Binding], float]:
    """Exhaustive min-makespan assignment; ties go to the lexicographically first proxy sequence."""
    if len(pool) > ORACLE_MAX_POOL or len(demands) > len(pool):
        raise OracleTooLarge(
            f"oracle handles |demands| <= |pool| <= {ORACLE_MAX_POOL}, "
            f"got {len(demands)} demands and {len(pool)} proxies", ORACLE_MAX_POOL)
    if not pool:
        raise EmptyPool("oracle needs at least one proxy")
    positions = {pid: _pos(p) for pid, p in pool.items()}
    best_seq: tuple = ()
    best_cost = math.inf
    for seq in permutations(sorted(positions), len(demands)):
        cost = max((positions[pid].dist(d.position) for pid, d in zip(seq, demands)), default=0.0)
        if cost < best_cost:
            best_cost, best_seq = cost, seq
    bindings = [Binding(d.object_id, pid, room_id) for pid, d in zip(best_seq, demands)]
    return bindings, (0.0 if best_cost is math.inf else best_cost)


def binding_state(b: Binding, proxy, target, tol: float) -> BindingState:
    """Engaged iff the proxy is within ``tol`` of its target (closed condition)."""
    p = _pos(proxy)
    return BindingState.ENGAGED if math.hypot(p.x - target[0], p.y - target[1]) <= tol else BindingState.PENDING


@dataclass
class StickySelector:
    """Nearest-object choice with hysteresis, e.g. which building a hand is reaching for."""

    margin: float = DEFAULT_MARGIN
    current: str | None = field(default=None)

    def choose(self, point, candidates: Mapping[str, Vec2]) -> str | None:
        if not candidates:
            self.current = None
            return None
        best = min(candidates, key=lambda k: (candidates[k].dist(point), k))
        if self.current in candidates and self.current != best:
            gain = candidates[self.current].dist(point) - candidates[best].dist(point)
            if gain <= self.margin:
                best = self.current
        self.current = best
        return best
