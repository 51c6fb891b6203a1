"""Pydantic request/response models for the wire."""
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class VideoMetaOut(BaseModel):
    video_id: str
    fps: float
    frame_count: int
    width: int
    height: int
    duration_s: float


class SessionCreateIn(BaseModel):
    video_id: str
    mode: Literal["OTF", "BBox"]
    speed: float | None = Field(default=None, gt=0)
    instance_id: int = 0
    class_id: int = 0


class SessionHandleOut(BaseModel):
    session_id: str
    video_id: str
    mode: str
    speed: float
    created_at: str
    status: Literal["live", "closed"]
    snapshot: dict[str, Any]


class SessionEventIn(BaseModel):
    wall_t: float
    kind: str
    x: float | None = None
    y: float | None = None
    box: tuple[float, float, float, float] | None = None
    t: float | None = None
    media_t: float | None = None


class WireEventIn(BaseModel):
    seq: int = Field(ge=1)
    event: SessionEventIn


class AckOut(BaseModel):
    kind: Literal["ack"] = "ack"
    seq: int
    media_t: float


class RejectOut(BaseModel):
    kind: Literal["reject"] = "reject"
    seq: int
    reason: str
    last_seq: int


class StateSyncOut(BaseModel):
    kind: Literal["state"] = "state"
    last_seq: int
    snapshot: dict[str, Any]


class FinalizeOut(BaseModel):
    session_id: str
    track: dict[str, Any]
    timing: dict[str, Any]
