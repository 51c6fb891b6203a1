"""Flat-file persistence and the live session registry.

Layout under the data directory:

    videos.json                      dataset index {videos[], split{}}
    sessions/<id>.events.jsonl       append-only wire-event log, one JSON per line
    sessions/<id>.meta.json          handle metadata incl. live/closed status
    tracks/<video_id>.json           annotation document {meta, otf_tracks, box_tracks}
    videos/                          optional raw video assets served statically

Durability contract: an event is fsynced to its session log before it is
acknowledged, so replaying the log after a crash reproduces the exact
session state. Rejected events may appear in the log (they are appended
before being applied); replay skips them deterministically because the
rejection rule itself is deterministic.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..model import Dataset, VideoMeta, dumps, parse_dataset_index, parse_video_doc, track_to_dict, video_doc_to_dict
from ..session import EventRejected, SessionEvent, SessionState


class StoreError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(message)


@dataclass
class LiveSession:
    session_id: str
    state: SessionState
    log_path: Path
    last_seq: int = 0
    created_at: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class DataStore:
    def __init__(self, data_dir: str | Path, default_speed: float = 0.2):
        self.root = Path(data_dir)
        self.default_speed = default_speed
        self.sessions_dir = self.root / "sessions"
        self.tracks_dir = self.root / "tracks"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.tracks_dir.mkdir(parents=True, exist_ok=True)
        self.live: dict[str, LiveSession] = {}
        self._registry_lock = threading.Lock()
        self._recover()

    # -- videos ----------------------------------------------------------

    def dataset(self) -> Dataset:
        index = self.root / "videos.json"
        if not index.exists():
            return Dataset()
        return parse_dataset_index(index.read_text(encoding="utf-8"))

    def video_meta(self, video_id: str) -> VideoMeta:
        for m in self.dataset().videos:
            if m.video_id == video_id:
                return m
        raise StoreError(404, f"unknown video {video_id!r}")

    # -- session lifecycle -------------------------------------------------

    def create_session(
        self, video_id: str, mode: str, speed: float | None,
        instance_id: int = 0, class_id: int = 0,
    ) -> LiveSession:
        self.video_meta(video_id)  # 404 on unknown video
        speed = speed if speed is not None else self.default_speed
        with self._registry_lock:
            for live in self.live.values():
                if live.state.video_id == video_id and live.state.mode == mode:
                    raise StoreError(409, f"live {mode} session already exists for {video_id!r}")
            session_id = uuid.uuid4().hex
            state = SessionState(video_id, mode, speed, instance_id, class_id)
            log_path = self.sessions_dir / f"{session_id}.events.jsonl"
            log_path.touch()  # empty log persisted immediately
            live = LiveSession(
                session_id=session_id,
                state=state,
                log_path=log_path,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            self._write_meta(live, status="live")
            self.live[session_id] = live
            return live

    def get_live(self, session_id: str) -> LiveSession:
        live = self.live.get(session_id)
        if live is None:
            if (self.sessions_dir / f"{session_id}.meta.json").exists():
                raise StoreError(409, f"session {session_id} is closed")
            raise StoreError(404, f"unknown session {session_id}")
        return live

    def ingest(self, session_id: str, seq: int, event: SessionEvent) -> tuple[bool, str, float]:
        """Apply one wire event. Returns (accepted, reason, media_t).

        The event line hits the disk before any response is produced.
        """
        live = self.get_live(session_id)
        with live.lock:
            if seq != live.last_seq + 1:
                return False, "seq_gap" if seq > live.last_seq + 1 else "seq_repeat", live.state.media_t
            self._append(live, seq, event)
            try:
                live.state.apply(event)
            except EventRejected as e:
                return False, e.reason, live.state.media_t
            live.last_seq = seq
            return True, "", live.state.media_t

    def finalize(self, session_id: str) -> tuple[dict, dict]:
        live = self.get_live(session_id)
        with live.lock:
            track, timing = live.state.finalize()  # SessionError propagates
            self._merge_track(track)
            self._write_meta(live, status="closed")
        with self._registry_lock:
            self.live.pop(session_id, None)
        return track_to_dict(track), timing

    # -- internals ---------------------------------------------------------

    def _append(self, live: LiveSession, seq: int, event: SessionEvent) -> None:
        line = dumps({"seq": seq, **event.to_dict()}) + "\n"
        with open(live.log_path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def _write_meta(self, live: LiveSession, status: str) -> None:
        meta = {
            "session_id": live.session_id,
            "video_id": live.state.video_id,
            "mode": live.state.mode,
            "speed": live.state.speed,
            "instance_id": live.state.instance_id,
            "class_id": live.state.class_id,
            "created_at": live.created_at,
            "status": status,
        }
        path = self.sessions_dir / f"{live.session_id}.meta.json"
        path.write_text(dumps(meta) + "\n", encoding="utf-8")

    def _merge_track(self, track) -> None:
        meta = self.video_meta(track.video_id)
        path = self.tracks_dir / f"{track.video_id}.json"
        if path.exists():
            _, otf, box = parse_video_doc(path.read_text(encoding="utf-8"))
        else:
            otf, box = [], []
        from ..model import OtfTrack

        if isinstance(track, OtfTrack):
            otf.append(track)
        else:
            box.append(track)
        path.write_text(dumps(video_doc_to_dict(meta, otf, box)) + "\n", encoding="utf-8")

    def _recover(self) -> None:
        """Rebuild live sessions from their logs after a restart."""
        for meta_path in sorted(self.sessions_dir.glob("*.meta.json")):
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            if meta.get("status") != "live":
                continue
            state = SessionState(
                meta["video_id"], meta["mode"], meta["speed"],
                meta.get("instance_id", 0), meta.get("class_id", 0),
            )
            log_path = self.sessions_dir / f"{meta['session_id']}.events.jsonl"
            last_seq = 0
            if log_path.exists():
                last_seq = replay_log(state, log_path.read_text(encoding="utf-8"))
            self.live[meta["session_id"]] = LiveSession(
                session_id=meta["session_id"],
                state=state,
                log_path=log_path,
                last_seq=last_seq,
                created_at=meta.get("created_at", ""),
            )


def replay_log(state: SessionState, text: str) -> int:
    """Fold a wire-event log into a state; returns the last accepted seq.

    Lines whose seq is not the next expected one, and events the state
    machine rejects, are skipped exactly as they were during live ingest.
    """
    expected = 1
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        if d.get("seq") != expected:
            continue
        ev = SessionEvent.from_dict(d)
        try:
            state.apply(ev)
        except EventRejected:
            continue
        expected += 1
    return expected - 1
