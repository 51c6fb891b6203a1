"""FastAPI application: REST resources plus one bidirectional websocket per
session carrying sequenced wire events."""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..analysis import (
    AnalysisError,
    BudgetModel,
    budget_otf,
    kde_density,
    load_timing_csv,
    match_budget,
    normalized_otf_points,
    speedup_stats,
)
from ..model import dumps, meta_to_dict, parse_video_doc
from ..session import SessionError, SessionEvent
from .schemas import (
    FinalizeOut,
    SessionCreateIn,
    SessionHandleOut,
    VideoMetaOut,
    WireEventIn,
)
from .store import DataStore, StoreError


def create_app(data_dir: str | Path, default_speed: float = 0.2) -> FastAPI:
    store = DataStore(data_dir, default_speed=default_speed)
    app = FastAPI(title="liveanno", version="0.1.0")
    app.state.store = store

    assets = Path(data_dir) / "videos"
    if assets.is_dir():
        app.mount("/videos/files", StaticFiles(directory=assets), name="video-assets")

    def _json(payload: dict | list) -> Response:
        return Response(content=dumps(payload), media_type="application/json")

    def _error(e: StoreError) -> Response:
        return Response(
            content=dumps({"detail": str(e)}), status_code=e.status, media_type="application/json"
        )

    @app.get("/videos", response_model=list[VideoMetaOut])
    def list_videos():
        return [meta_to_dict(m) for m in store.dataset().videos]

    @app.post("/sessions", response_model=SessionHandleOut, status_code=201)
    def create_session(body: SessionCreateIn):
        try:
            live = store.create_session(
                body.video_id, body.mode, body.speed, body.instance_id, body.class_id
            )
        except StoreError as e:
            return _error(e)
        return SessionHandleOut(
            session_id=live.session_id,
            video_id=live.state.video_id,
            mode=live.state.mode,
            speed=live.state.speed,
            created_at=live.created_at,
            status="live",
            snapshot=live.state.snapshot(),
        )

    @app.get("/sessions/{session_id}", response_model=SessionHandleOut)
    def get_session(session_id: str):
        try:
            live = store.get_live(session_id)
        except StoreError as e:
            return _error(e)
        return SessionHandleOut(
            session_id=live.session_id,
            video_id=live.state.video_id,
            mode=live.state.mode,
            speed=live.state.speed,
            created_at=live.created_at,
            status="live",
            snapshot=live.state.snapshot(),
        )

    @app.post("/sessions/{session_id}/finalize", response_model=FinalizeOut)
    def finalize_session(session_id: str):
        try:
            track, timing = store.finalize(session_id)
        except StoreError as e:
            return _error(e)
        except SessionError as e:
            return Response(
                content=dumps({"detail": str(e), "reason": e.reason}),
                status_code=409,
                media_type="application/json",
            )
        return FinalizeOut(session_id=session_id, track=track, timing=timing)

    @app.websocket("/sessions/{session_id}/events")
    async def session_events(ws: WebSocket, session_id: str):
        await ws.accept()
        try:
            live = store.get_live(session_id)
        except StoreError as e:
            await ws.send_text(dumps({"kind": "error", "status": e.status, "detail": str(e)}))
            await ws.close(code=1008)
            return
        await ws.send_text(
            dumps({"kind": "state", "last_seq": live.last_seq, "snapshot": live.state.snapshot()})
        )
        try:
            while True:
                text = await ws.receive_text()
                try:
                    wire = WireEventIn.model_validate_json(text)
                except ValidationError:
                    await ws.send_text(
                        dumps({"kind": "reject", "seq": -1, "reason": "malformed_event",
                               "last_seq": live.last_seq})
                    )
                    continue
                event = SessionEvent(**wire.event.model_dump())
                try:
                    accepted, reason, media_t = store.ingest(session_id, wire.seq, event)
                except StoreError:
                    accepted, reason, media_t = False, "session_closed", live.state.media_t
                if accepted:
                    await ws.send_text(dumps({"kind": "ack", "seq": wire.seq, "media_t": media_t}))
                else:
                    await ws.send_text(
                        dumps({"kind": "reject", "seq": wire.seq, "reason": reason,
                               "last_seq": live.last_seq})
                    )
        except WebSocketDisconnect:
            return

    @app.get("/analyses/{kind}")
    def get_analysis(
        kind: str,
        records: str | None = None,
        annotations: str | None = None,
        resolution: int = 64,
        bandwidth: str | None = None,
        t_bbox: float | None = None,
        t_otf: float | None = None,
        n_box: int | None = None,
        n_weak: int | None = None,
        match: bool = False,
    ):
        try:
            if kind == "timing":
                if not records:
                    raise AnalysisError("timing analysis needs ?records=<csv in data dir>")
                path = _resolve(store.root, records)
                report = speedup_stats(load_timing_csv(path.read_text(encoding="utf-8")))
                return _json(report.to_dict())
            if kind == "budget":
                if None in (t_bbox, t_otf, n_box, n_weak):
                    raise AnalysisError("budget analysis needs t_bbox, t_otf, n_box, n_weak")
                model = BudgetModel(t_bbox, t_otf, n_box, n_weak)
                out = {"b_otf_min": budget_otf(model)}
                if match:
                    matched = match_budget(model)
                    out["n_box_bbox"] = matched.n_box_bbox
                    out["residual_minutes"] = matched.residual_minutes
                    out["b_bbox_min"] = matched.n_box_bbox * model.t_bbox_per_video
                return _json(out)
            if kind == "density":
                if not annotations:
                    raise AnalysisError("density analysis needs ?annotations=<doc[,doc...]>")
                pts = []
                for rel in annotations.split(","):
                    meta, otf, box = parse_video_doc(_resolve(store.root, rel).read_text(encoding="utf-8"))
                    pts.extend(normalized_otf_points(meta, otf, box))
                bw = None
                if bandwidth:
                    h_u, h_v = (float(v) for v in bandwidth.split(","))
                    bw = (h_u, h_v)
                grid = kde_density(pts, resolution=resolution, bandwidth=bw)
                return _json(
                    {
                        "resolution": grid.resolution,
                        "bandwidth": list(grid.bandwidth),
                        "n_points": len(pts),
                        "cells": [[float(v) for v in row] for row in grid.cells],
                    }
                )
        except FileNotFoundError as e:
            return Response(content=dumps({"detail": str(e)}), status_code=404,
                            media_type="application/json")
        except (AnalysisError, SessionError, ValueError) as e:
            return Response(content=dumps({"detail": str(e)}), status_code=422,
                            media_type="application/json")
        return Response(content=dumps({"detail": f"unknown analysis kind {kind!r}"}),
                        status_code=404, media_type="application/json")

    return app


def _resolve(root: Path, rel: str) -> Path:
    path = (root / rel).resolve()
    if not str(path).startswith(str(root.resolve())):
        raise FileNotFoundError(f"path {rel!r} escapes the data directory")
    if not path.exists():
        raise FileNotFoundError(f"no such file in data dir: {rel!r}")
    return path
