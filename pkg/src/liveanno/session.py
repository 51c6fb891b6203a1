"""Live annotation session engine.

A session is a single-writer state machine fed a strictly ordered event
stream. The playback clock advances media time by ``speed * elapsed wall
time`` while playing; clients that decode the video themselves may stamp
events with their own media time instead, which the engine validates for
monotonicity rather than deriving. Cursor events accumulate point samples,
begin/stop events bracket visibility segments, and keyframe events build
the box baseline. Folding the same event list from a fresh state always
reproduces the same track, which is what makes append-only logs replayable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import (
    Box,
    BoxKeyframe,
    BoxTrack,
    FrameAnnotation,
    OtfTrack,
    PointSample,
    VideoMeta,
    VisibilitySegment,
    box_is_valid,
    format_float,
    dumps,
)

MODES = ("OTF", "BBox")
EVENT_KINDS = (
    "play",
    "pause",
    "cursor",
    "begin_annotation",
    "stop_annotation",
    "set_keyframe",
    "delete_keyframe",
    "seek",
    "end_session",
)

# Paused gaps longer than this are treated as breaks and excluded from
# active annotation time.
DEFAULT_IDLE_GAP_S = 30.0


class EventRejected(Exception):
    """An event that cannot be applied in the current state."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(reason if not detail else f"{reason}: {detail}")


class SessionError(Exception):
    """A session log that cannot be finalized."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(reason if not detail else f"{reason}: {detail}")


@dataclass
class SessionEvent:
    wall_t: float
    kind: str
    x: float | None = None
    y: float | None = None
    box: Box | None = None
    t: float | None = None  # seek target / keyframe time for delete
    media_t: float | None = None  # optional client clock stamp

    def to_dict(self) -> dict:
        d: dict = {"wall_t": self.wall_t, "kind": self.kind}
        if self.x is not None:
            d["x"] = self.x
        if self.y is not None:
            d["y"] = self.y
        if self.box is not None:
            d["box"] = list(self.box)
        if self.t is not None:
            d["t"] = self.t
        if self.media_t is not None:
            d["media_t"] = self.media_t
        return d

    @staticmethod
    def from_dict(d: dict) -> "SessionEvent":
        box = d.get("box")
        return SessionEvent(
            wall_t=float(d["wall_t"]),
            kind=str(d["kind"]),
            x=float(d["x"]) if d.get("x") is not None else None,
            y=float(d["y"]) if d.get("y") is not None else None,
            box=tuple(float(v) for v in box) if box is not None else None,
            t=float(d["t"]) if d.get("t") is not None else None,
            media_t=float(d["media_t"]) if d.get("media_t") is not None else None,
        )


@dataclass
class SessionLog:
    video_id: str
    mode: str
    events: list[SessionEvent] = field(default_factory=list)
    active_annotation_s: float = 0.0
    total_wall_s: float = 0.0

    def to_jsonl(self) -> str:
        header = {"video_id": self.video_id, "mode": self.mode}
        lines = [json.dumps(header)]
        lines += [dumps(ev.to_dict()) for ev in self.events]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "SessionLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise SessionError("empty_log")
        header = json.loads(lines[0])
        events = [SessionEvent.from_dict(json.loads(ln)) for ln in lines[1:]]
        return SessionLog(video_id=header["video_id"], mode=header["mode"], events=events)


class SessionState:
    """One live session. Events must be applied strictly serialized."""

    def __init__(
        self,
        video_id: str,
        mode: str = "OTF",
        speed: float = 0.2,
        instance_id: int = 0,
        class_id: int = 0,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if speed <= 0:
            raise ValueError("speed must be > 0")
        self.video_id = video_id
        self.mode = mode
        self.speed = speed
        self.instance_id = instance_id
        self.class_id = class_id
        self.clock_state = "stopped"  # stopped | playing | paused
        self.media_t = 0.0
        self.last_wall_t: float | None = None
        self.samples: list[PointSample] = []
        self.segments: list[VisibilitySegment] = []
        self.open_segment_start: float | None = None
        self._open_segment_sample_idx = 0
        self.keyframes: dict[float, Box] = {}
        self.events: list[SessionEvent] = []
        self.ended = False

    # -- clock ---------------------------------------------------------

    def _advance(self, ev: SessionEvent) -> None:
        if self.last_wall_t is not None and ev.wall_t < self.last_wall_t:
            raise EventRejected("out_of_order_wall", f"{ev.wall_t} < {self.last_wall_t}")
        if self.clock_state == "playing" and self.last_wall_t is not None:
            derived = self.media_t + self.speed * (ev.wall_t - self.last_wall_t)
        else:
            derived = self.media_t
        if ev.media_t is not None and ev.kind != "seek":
            if ev.media_t < self.media_t - 1e-9:
                raise EventRejected("media_backward", f"{ev.media_t} < {self.media_t}")
            self.media_t = ev.media_t
        else:
            self.media_t = derived
        self.last_wall_t = ev.wall_t

    # -- event application ----------------------------------------------

    def apply(self, ev: SessionEvent) -> None:
        """Apply one event; raises EventRejected and leaves state untouched
        on invalid input (the wall/media clock is only committed on accept)."""
        if ev.kind not in EVENT_KINDS:
            raise EventRejected("unknown_kind", ev.kind)
        if self.ended:
            raise EventRejected("session_ended")

        saved = (self.clock_state, self.media_t, self.last_wall_t)
        self._advance(ev)
        try:
            getattr(self, f"_apply_{ev.kind}")(ev)
        except EventRejected:
            self.clock_state, self.media_t, self.last_wall_t = saved
            raise
        self.events.append(ev)

    def _apply_play(self, ev: SessionEvent) -> None:
        if self.clock_state == "playing":
            raise EventRejected("already_playing")
        self.clock_state = "playing"

    def _apply_pause(self, ev: SessionEvent) -> None:
        if self.clock_state != "playing":
            raise EventRejected("not_playing")
        self.clock_state = "paused"

    def _apply_seek(self, ev: SessionEvent) -> None:
        # Scrubbing during live annotation is not part of the workflow:
        # seeks are only legal while paused/stopped and outside a segment.
        if self.clock_state == "playing":
            raise EventRejected("seek_while_playing")
        if self.open_segment_start is not None:
            raise EventRejected("seek_during_annotation")
        if ev.t is None or ev.t < 0:
            raise EventRejected("invalid_seek_target")
        self.media_t = ev.t

    def _apply_cursor(self, ev: SessionEvent) -> None:
        if self.mode != "OTF":
            raise EventRejected("wrong_mode", "cursor events only in OTF sessions")
        if ev.x is None or ev.y is None:
            raise EventRejected("missing_coordinates")
        if self.open_segment_start is None and self.clock_state != "playing":
            raise EventRejected("no_active_annotation")
        if self.samples and self.media_t <= self.samples[-1].media_t:
            raise EventRejected("non_monotonic_sample", f"media_t {self.media_t}")
        if self.open_segment_start is None:
            # first cursor after play implicitly begins an annotation,
            # recorded explicitly so the log replays without special cases
            begin = SessionEvent(wall_t=ev.wall_t, kind="begin_annotation", media_t=self.media_t)
            self._apply_begin_annotation(begin)
            self.events.append(begin)
        self.samples.append(PointSample(media_t=self.media_t, x=ev.x, y=ev.y, wall_t=ev.wall_t))

    def _apply_begin_annotation(self, ev: SessionEvent) -> None:
        if self.open_segment_start is not None:
            raise EventRejected("annotation_already_open")
        if self.segments and self.media_t < self.segments[-1].end_t:
            raise EventRejected("overlaps_previous_segment")
        self.open_segment_start = self.media_t
        self._open_segment_sample_idx = len(self.samples)

    def _apply_stop_annotation(self, ev: SessionEvent) -> None:
        if self.open_segment_start is None:
            raise EventRejected("no_open_annotation")
        start = self.open_segment_start
        end = self.media_t
        if end > start:
            self.segments.append(VisibilitySegment(start_t=start, end_t=end))
        else:
            # zero-length annotation: nothing usable was produced
            del self.samples[self._open_segment_sample_idx:]
        self.open_segment_start = None

    def _apply_set_keyframe(self, ev: SessionEvent) -> None:
        if self.mode != "BBox":
            raise EventRejected("wrong_mode", "keyframes only in BBox sessions")
        if ev.box is None or not box_is_valid(ev.box):
            raise EventRejected("invalid_box")
        t = self.media_t
        in_open = self.open_segment_start is not None and t >= self.open_segment_start
        in_closed = any(seg.contains(t) for seg in self.segments)
        if not (in_open or in_closed):
            raise EventRejected("keyframe_outside_segment")
        self.keyframes[t] = tuple(ev.box)

    def _apply_delete_keyframe(self, ev: SessionEvent) -> None:
        if self.mode != "BBox":
            raise EventRejected("wrong_mode")
        if ev.t is None or ev.t not in self.keyframes:
            raise EventRejected("missing_keyframe", f"t={ev.t}")
        del self.keyframes[ev.t]

    def _apply_end_session(self, ev: SessionEvent) -> None:
        self.clock_state = "stopped"
        self.ended = True

    # -- outputs ---------------------------------------------------------

    def snapshot(self) -> dict:
        """Deterministic full-state dump used for durability checks."""
        return {
            "video_id": self.video_id,
            "mode": self.mode,
            "speed": self.speed,
            "clock_state": self.clock_state,
            "media_t": self.media_t,
            "last_wall_t": self.last_wall_t,
            "samples": [[s.media_t, s.x, s.y, s.wall_t] for s in self.samples],
            "segments": [[s.start_t, s.end_t] for s in self.segments],
            "open_segment_start": self.open_segment_start,
            "keyframes": [[t, list(b)] for t, b in sorted(self.keyframes.items())],
            "n_events": len(self.events),
            "ended": self.ended,
        }

    def build_log(self, idle_gap_s: float = DEFAULT_IDLE_GAP_S) -> SessionLog:
        wall_s, active_s = session_timing(self.events, self.speed, idle_gap_s)
        return SessionLog(
            video_id=self.video_id,
            mode=self.mode,
            events=list(self.events),
            active_annotation_s=active_s,
            total_wall_s=wall_s,
        )

    def finalize(self) -> tuple[OtfTrack | BoxTrack, dict]:
        """Build the finished track; requires end_session and closed segments."""
        if not self.ended:
            raise SessionError("no_end_session")
        if self.open_segment_start is not None:
            raise SessionError("unclosed_segment", f"open since media_t={self.open_segment_start}")
        wall_s, active_s = session_timing(self.events, self.speed)
        timing = {"wall_s": wall_s, "active_s": active_s, "warnings": []}
        if self.mode == "OTF":
            track: OtfTrack | BoxTrack = OtfTrack(
                video_id=self.video_id,
                instance_id=self.instance_id,
                class_id=self.class_id,
                samples=list(self.samples),
                segments=list(self.segments),
                playback_speed=self.speed,
            )
        else:
            kfs = [BoxKeyframe(t, b) for t, b in sorted(self.keyframes.items())]
            segments = []
            for seg in self.segments:
                if any(seg.contains(k.media_t) for k in kfs):
                    segments.append(seg)
                else:
                    timing["warnings"].append(
                        f"dropped_segment_without_keyframe@{format_float(seg.start_t)}"
                    )
            kfs = [k for k in kfs if any(seg.contains(k.media_t) for seg in segments)]
            track = BoxTrack(
                video_id=self.video_id,
                instance_id=self.instance_id,
                class_id=self.class_id,
                keyframes=kfs,
                segments=segments,
            )
        return track, timing


def session_timing(
    events: Sequence[SessionEvent], speed: float, idle_gap_s: float = DEFAULT_IDLE_GAP_S
) -> tuple[float, float]:
    """(wall_s, active_s) for an event list.

    wall_s spans first to last event. active_s removes paused/stopped gaps
    longer than ``idle_gap_s`` (breaks should not pollute timing studies).
    """
    if not events:
        return 0.0, 0.0
    wall_s = events[-1].wall_t - events[0].wall_t
    idle = 0.0
    clock = "stopped"
    for prev, cur in zip(events, events[1:]):
        if prev.kind == "play":
            clock = "playing"
        elif prev.kind in ("pause", "end_session"):
            clock = "paused"
        gap = cur.wall_t - prev.wall_t
        if clock != "playing" and gap > idle_gap_s:
            idle += gap
    return wall_s, max(0.0, wall_s - idle)


def replay_events(
    events: Iterable[SessionEvent],
    video_id: str,
    mode: str = "OTF",
    speed: float = 0.2,
    instance_id: int = 0,
    class_id: int = 0,
) -> SessionState:
    """Fold events over a fresh state; rejected events abort the replay."""
    state = SessionState(video_id, mode, speed, instance_id, class_id)
    for ev in events:
        state.apply(ev)
    return state


def finalize_session(
    log: SessionLog, speed: float = 0.2, instance_id: int = 0, class_id: int = 0
) -> tuple[OtfTrack | BoxTrack, dict]:
    """Replay a session log and return (track, timing)."""
    if not log.events:
        raise SessionError("no_end_session")
    state = replay_events(log.events, log.video_id, log.mode, speed, instance_id, class_id)
    return state.finalize()


# ---------------------------------------------------------------------------
# track-level operations

def trim_edges(track: OtfTrack, window: float) -> OtfTrack:
    """Drop samples recorded within ``window`` seconds of a segment boundary.

    Reaction lag makes samples near annotation start/stop unreliable; this
    removes every sample closer than ``window`` to its segment's edges.
    Segment bounds themselves are kept (visibility is unaffected by sample
    trust), except that segments whose interior [start+w, end-w] vanishes,
    or which lose all their samples, are dropped entirely. The operation is
    idempotent for a fixed window, and window=0 returns the track unchanged.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    if window == 0:
        return track
    segments: list[VisibilitySegment] = []
    samples: list[PointSample] = []
    for seg in track.segments:
        lo, hi = seg.start_t + window, seg.end_t - window
        if lo >= hi:
            continue
        kept = [s for s in track.samples if seg.contains(s.media_t) and lo <= s.media_t <= hi]
        if not kept:
            continue
        segments.append(seg)
        samples.extend(kept)
    samples.sort(key=lambda s: s.media_t)
    return OtfTrack(
        video_id=track.video_id,
        instance_id=track.instance_id,
        class_id=track.class_id,
        samples=samples,
        segments=segments,
        playback_speed=track.playback_speed,
    )


def align_to_frames(track: OtfTrack, meta: VideoMeta) -> list[FrameAnnotation]:
    """Sample-and-hold the cursor stream onto the video's frame grid.

    Every frame whose timestamp falls in a visibility segment gets the
    latest sample at or before it from that segment; frames before the
    segment's first sample fall back to that first sample. Frames outside
    all segments are omitted.
    """
    out: list[FrameAnnotation] = []
    per_segment = [
        [s for s in track.samples if seg.contains(s.media_t)] for seg in track.segments
    ]
    for seg, seg_samples in zip(track.segments, per_segment):
        if not seg_samples:
            raise SessionError("segment_without_samples", f"[{seg.start_t}, {seg.end_t}]")
    for frame_idx in range(meta.frame_count):
        t_f = frame_idx / meta.fps
        for seg, seg_samples in zip(track.segments, per_segment):
            if not seg.contains(t_f):
                continue
            held = None
            for s in seg_samples:
                if s.media_t <= t_f:
                    held = s
                else:
                    break
            if held is None:
                held = seg_samples[0]
            out.append(
                FrameAnnotation(
                    video_id=track.video_id,
                    frame_idx=frame_idx,
                    point=(held.x, held.y),
                    source="human_point",
                )
            )
            break
    return out


def subsample_frames(annos: Sequence[FrameAnnotation], stride: int) -> list[FrameAnnotation]:
    """Keep annotations whose frame index is a multiple of ``stride``."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return [a for a in annos if a.frame_idx % stride == 0]


def interpolate_box(track: BoxTrack, t: float) -> Box | None:
    """Box at media time t: linear between keyframes, held beyond the first/
    last keyframe of the containing segment, None outside all segments."""
    seg = next((s for s in track.segments if s.contains(t)), None)
    if seg is None:
        return None
    kfs = [k for k in track.keyframes if seg.contains(k.media_t)]
    if not kfs:
        return None
    before = None
    after = None
    for k in kfs:
        if k.media_t <= t:
            before = k
        if k.media_t >= t and after is None:
            after = k
    if before is None:
        return after.box
    if after is None:
        return before.box
    if after.media_t == before.media_t:
        return before.box
    w = (t - before.media_t) / (after.media_t - before.media_t)
    return tuple(a + w * (b - a) for a, b in zip(before.box, after.box))


def upsert_keyframe(track: BoxTrack, t: float, box: Box) -> BoxTrack:
    """Insert or replace the keyframe at exactly t; list stays sorted."""
    if not box_is_valid(box):
        raise ValueError(f"invalid box {box}")
    kfs = [k for k in track.keyframes if k.media_t != t]
    kfs.append(BoxKeyframe(media_t=t, box=tuple(box)))
    kfs.sort(key=lambda k: k.media_t)
    return BoxTrack(
        video_id=track.video_id,
        instance_id=track.instance_id,
        class_id=track.class_id,
        keyframes=kfs,
        segments=list(track.segments),
    )


class MissingKeyframeError(KeyError):
    pass


def delete_keyframe(track: BoxTrack, t: float) -> BoxTrack:
    """Remove the keyframe at exactly t; error if none exists there."""
    if not any(k.media_t == t for k in track.keyframes):
        raise MissingKeyframeError(t)
    return BoxTrack(
        video_id=track.video_id,
        instance_id=track.instance_id,
        class_id=track.class_id,
        keyframes=[k for k in track.keyframes if k.media_t != t],
        segments=list(track.segments),
    )
