"""Request and response bodies of the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

BodyValue = Union[bool, int, float, str]


class Health(BaseModel):
    status: str = "ok"
    version: str


class RunRequest(BaseModel):
    scenario: Optional[str] = Field(None, description="builtin scenario name")
    script: Optional[str] = Field(None, description="script text, used when no scenario name is given")
    seed: Optional[int] = None
    delay: Optional[float] = Field(None, ge=0.0)
    drop: Optional[float] = Field(None, ge=0.0, le=1.0)
    base_latency: Optional[float] = Field(None, ge=0.0)
    jitter: Optional[float] = Field(None, ge=0.0)
    include_trace: bool = True


class RunResponse(BaseModel):
    exit_code: int
    summary: dict[str, BodyValue]
    violations: list[str] = []
    trace: Optional[str] = None


class ScriptText(BaseModel):
    script: str


class ValidationReport(BaseModel):
    ok: bool
    line: Optional[int] = None
    error: Optional[str] = None


class Point(BaseModel):
    x: float
    y: float


class ProxyIn(Point):
    id: int


class DemandIn(Point):
    object: str


class AssignmentRequest(BaseModel):
    proxies: list[ProxyIn]
    demands: list[DemandIn]


class AssignmentOut(BaseModel):
    object: str
    proxy: int


class AssignmentResponse(BaseModel):
    assignments: list[AssignmentOut]
    makespan: float
    records: list[str]


class MoveIn(BaseModel):
    x0: float
    y0: float
    heading: float = 0.0
    x: float
    y: float
    room: int = 1


class LimitsIn(BaseModel):
    v_max: float = Field(0.5, gt=0)
    w_max: float = Field(6.283185307179586, gt=0)
    arrive_pos_tol: float = Field(0.01, gt=0)
    arrive_heading_tol: float = Field(0.1, gt=0)
    distance_gain: float = Field(10.0, gt=0)
    heading_gain: float = Field(10.0, gt=0)


class MaskingRequest(BaseModel):
    moves: Optional[list[MoveIn]] = Field(None, description="defaults to the demo fixture moves")
    limits: LimitsIn = LimitsIn()


class MaskingResponse(BaseModel):
    min_delay: float
    bounds: list[float]
    records: list[str]


class EnvelopeIn(BaseModel):
    seq: int = Field(ge=0, le=0xFFFFFFFF)
    sent_at: float = Field(ge=0.0)
    room_id: int = Field(ge=0, le=0xFF)
    kind: Literal["pose_update", "binding_update", "gesture_event", "game_event", "ack"]
    body: dict[str, BodyValue] = {}


class EncodedEnvelope(BaseModel):
    hex: str


class RoomIn(BaseModel):
    room_id: int
    half_width: float = Field(gt=0)
    half_depth: float = Field(gt=0)
    seat: Literal["south", "east", "north", "west"] = "south"


class WorkspaceRequest(BaseModel):
    rooms: list[RoomIn]


class WorkspaceResponse(BaseModel):
    half_width: float
    half_depth: float


class SessionCreated(BaseModel):
    session: str


class EnvelopeBatch(BaseModel):
    envelopes: list[str] = Field(description="hex-encoded wire envelopes")


class IngestReport(BaseModel):
    applied: int
    stale: int
    rejected: list[str] = []


class EntityOut(BaseModel):
    entity: str
    x: float
    y: float
    heading: float
    sent_at: float
    seq: int
    room_id: int
