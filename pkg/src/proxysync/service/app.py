"""FastAPI wrapper around the library.

Every endpoint is a thin adapter: it validates the request with pydantic,
calls the same functions the CLI uses, and returns plain data.
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import CodecError, OracleTooLarge, ProxySyncError, ScriptValidation
from ..geometry import Pose2, Rect, RoomConfig, Vec2, shared_workspace
from ..mapping import DemandPoint, optimal_assignment
from ..oracles import Move, assignment_report, demo_moves, masking_report, move_bounds
from ..proxy import RobotLimits
from ..runner import RunConfig, apply_overrides, execute, load_script, with_seed_and_delay
from ..scenarios.builtin import BUILDERS
from ..scenarios.script import SEATS, parse_script, script_text
from ..sync import Envelope, Kind, Replica, decode, encode, snapshot_of
from . import models as m

_KINDS = {k.name.lower(): k for k in Kind}


class Session:
    """One room's replica. Producers may post concurrently; a lock keeps a single writer."""

    def __init__(self):
        self.replica = Replica()
        self.lock = threading.Lock()

    def ingest(self, envelopes: list[Envelope]) -> tuple[int, int]:
        applied = stale = 0
        with self.lock:
            for env in envelopes:
                if env.kind is not Kind.POSE_UPDATE:
                    continue
                if self.replica.apply(snapshot_of(env)):
                    applied += 1
                else:
                    stale += 1
        return applied, stale


def create_app() -> FastAPI:
    app = FastAPI(title="proxysync", version=__version__)
    sessions: dict[str, Session] = {}

    @app.get("/health", response_model=m.Health)
    def health():
        return m.Health(version=__version__)

    @app.get("/scenarios")
    def scenarios() -> list[str]:
        return list(BUILDERS)

    @app.get("/scenarios/{name}/script", response_model=m.ScriptText)
    def scenario_script(name: str, seed: int = 0, delay: float | None = None):
        if name not in BUILDERS:
            raise HTTPException(404, f"unknown scenario {name!r}")
        if delay is not None and delay < 0:
            raise HTTPException(422, "delay must be >= 0")
        return m.ScriptText(script=script_text(load_script(name, seed, delay)))

    @app.post("/scenarios/run", response_model=m.RunResponse)
    def run_scenario(req: m.RunRequest):
        try:
            if req.scenario is not None:
                if req.scenario not in BUILDERS:
                    raise ScriptValidation(f"unknown scenario {req.scenario!r}")
                script = load_script(req.scenario, req.seed, req.delay)
            elif req.script is not None:
                script = with_seed_and_delay(parse_script(req.script), req.seed, req.delay)
            else:
                raise ScriptValidation("give a scenario name or script text")
            cfg = RunConfig("inline", base_latency=req.base_latency, jitter=req.jitter, drop=req.drop)
            outcome = execute(apply_overrides(script, cfg))
        except ScriptValidation as exc:
            raise HTTPException(422, str(exc)) from exc
        return m.RunResponse(exit_code=outcome.exit_code, summary=outcome.summary,
                             violations=outcome.violations,
                             trace=outcome.trace_text if req.include_trace else None)

    @app.post("/scripts/validate", response_model=m.ValidationReport)
    def validate_script(body: m.ScriptText):
        try:
            parse_script(body.script)
        except ScriptValidation as exc:
            return m.ValidationReport(ok=False, line=exc.line, error=str(exc))
        return m.ValidationReport(ok=True)

    @app.post("/oracles/assignment", response_model=m.AssignmentResponse)
    def assignment(req: m.AssignmentRequest):
        demands = [DemandPoint(d.object, Vec2(d.x, d.y)) for d in req.demands]
        pool = {p.id: Vec2(p.x, p.y) for p in req.proxies}
        try:
            bindings, cost = optimal_assignment(demands, pool)
        except OracleTooLarge as exc:
            raise HTTPException(422, {"error": str(exc), "bound": exc.bound}) from exc
        except ProxySyncError as exc:
            raise HTTPException(422, str(exc)) from exc
        return m.AssignmentResponse(
            assignments=[m.AssignmentOut(object=b.object_id, proxy=b.proxy_id) for b in bindings],
            makespan=cost, records=assignment_report(demands, pool))

    @app.post("/oracles/masking", response_model=m.MaskingResponse)
    def masking(req: m.MaskingRequest):
        limits = RobotLimits(**req.limits.model_dump())
        if req.moves is None:
            moves = demo_moves()
        else:
            moves = [Move(Pose2.at(mv.x0, mv.y0, mv.heading), Vec2(mv.x, mv.y), mv.room) for mv in req.moves]
        bounds = move_bounds(moves, limits)
        return m.MaskingResponse(min_delay=max(bounds) if bounds else 0.0, bounds=bounds,
                                 records=masking_report(moves, limits))

    @app.post("/codec/encode", response_model=m.EncodedEnvelope)
    def codec_encode(req: m.EnvelopeIn):
        try:
            env = Envelope(req.seq, req.sent_at, req.room_id, _KINDS[req.kind], dict(req.body))
            return m.EncodedEnvelope(hex=encode(env).hex())
        except (ValueError, TypeError) as exc:
            raise HTTPException(422, str(exc)) from exc

    @app.post("/codec/decode", response_model=m.EnvelopeIn)
    def codec_decode(req: m.EncodedEnvelope):
        try:
            env = decode(bytes.fromhex(req.hex))
        except ValueError as exc:
            raise HTTPException(422, f"not hex: {exc}") from exc
        except CodecError as exc:
            raise HTTPException(422, f"{type(exc).__name__}: {exc}") from exc
        return m.EnvelopeIn(seq=env.seq, sent_at=env.sent_at, room_id=env.room_id,
                            kind=env.kind.name.lower(), body=env.body)

    @app.post("/workspace", response_model=m.WorkspaceResponse)
    def workspace(req: m.WorkspaceRequest):
        try:
            rooms = [RoomConfig(r.room_id, Rect(r.half_width, r.half_depth), SEATS[r.seat]) for r in req.rooms]
            ws = shared_workspace(rooms)
        except ProxySyncError as exc:
            raise HTTPException(422, str(exc)) from exc
        return m.WorkspaceResponse(half_width=ws.bounds.half_width, half_depth=ws.bounds.half_depth)

    @app.post("/sessions", response_model=m.SessionCreated)
    def new_session():
        sid = uuid.uuid4().hex
        sessions[sid] = Session()
        return m.SessionCreated(session=sid)

    def _session(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(404, f"no session {sid}")
        return sessions[sid]

    @app.post("/sessions/{sid}/envelopes", response_model=m.IngestReport)
    def ingest(sid: str, batch: m.EnvelopeBatch):
        session = _session(sid)
        good, rejected = [], []
        for h in batch.envelopes:
            try:
                good.append(decode(bytes.fromhex(h)))
            except (ValueError, CodecError) as exc:
                rejected.append(f"{type(exc).__name__}: {exc}")
        applied, stale = session.ingest(good)
        return m.IngestReport(applied=applied, stale=stale, rejected=rejected)

    @app.get("/sessions/{sid}/replica", response_model=list[m.EntityOut])
    def replica(sid: str):
        session = _session(sid)
        with session.lock:
            snaps = sorted(session.replica.snapshots.values(), key=lambda s: s.entity_id)
        return [m.EntityOut(entity=s.entity_id, x=s.pose.position.x, y=s.pose.position.y,
                            heading=s.pose.heading, sent_at=s.stamp[0], seq=s.stamp[1], room_id=s.stamp[2])
                for s in snaps]

    return app


app = create_app()
