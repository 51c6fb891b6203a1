"""Domain types for live video point/box annotation.

Coordinates are pixels of the source video; times are float seconds.
Types are plain dataclasses used as values: code that edits a track builds
a new one. Validation is explicit and reports violations as data
(``validate_track``) so that malformed inputs can be inspected instead of
exploding at construction time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

Box = tuple[float, float, float, float]  # x_min, y_min, x_max, y_max

ANNOTATION_SOURCES = ("human_box", "human_point", "pseudo_box")
SPLIT_LABELS = ("train_box", "train_weak", "val", "test")


class DegenerateBoxError(ValueError):
    """Box with zero or negative width/height where a proper box is required."""


class DecodeError(ValueError):
    """Malformed annotation or index document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# box helpers

def box_width(box: Box) -> float:
    return box[2] - box[0]


def box_height(box: Box) -> float:
    return box[3] - box[1]


def box_area(box: Box) -> float:
    return max(0.0, box_width(box)) * max(0.0, box_height(box))


def box_center(box: Box) -> tuple[float, float]:
    return (box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0


def box_is_valid(box: Box) -> bool:
    return box[0] < box[2] and box[1] < box[3]


def clip_box(box: Box, width: float, height: float) -> Box | None:
    """Clip a box to the frame; None if nothing remains."""
    x0 = max(box[0], 0.0)
    y0 = max(box[1], 0.0)
    x1 = min(box[2], float(width))
    y1 = min(box[3], float(height))
    if x0 >= x1 or y0 >= y1:
        return None
    return (x0, y0, x1, y1)


def media_to_frame(media_t: float, fps: float) -> int:
    """Map a media time to a frame index, rounding half up."""
    return int(math.floor(media_t * fps + 0.5))


def normalize_point(point: tuple[float, float], box: Box) -> tuple[float, float]:
    """Express a pixel point in box-relative coordinates.

    (0, 0) is the box's min corner, (1, 1) its max corner; values outside
    [0, 1] mean the point lies outside the box. Translating both point and
    box by the same offset leaves the result unchanged.
    """
    w = box_width(box)
    h = box_height(box)
    if w <= 0 or h <= 0:
        raise DegenerateBoxError(f"box {box} has no area")
    return (point[0] - box[0]) / w, (point[1] - box[1]) / h


def point_inside_unit(uv: tuple[float, float]) -> bool:
    return 0.0 <= uv[0] <= 1.0 and 0.0 <= uv[1] <= 1.0


# ---------------------------------------------------------------------------
# types

@dataclass
class VideoMeta:
    video_id: str
    fps: float
    frame_count: int
    width: int
    height: int
    duration_s: float | None = None

    def __post_init__(self):
        if self.duration_s is None:
            self.duration_s = self.frame_count / self.fps

    def validate(self) -> list[str]:
        v = []
        if self.fps <= 0:
            v.append("nonpositive_fps")
        if self.frame_count < 1:
            v.append("empty_video")
        if self.width < 1 or self.height < 1:
            v.append("invalid_frame_size")
        if self.fps > 0 and abs(self.duration_s - self.frame_count / self.fps) > 1.0 / self.fps:
            v.append("inconsistent_duration")
        return v


@dataclass
class PointSample:
    media_t: float
    x: float
    y: float
    wall_t: float


@dataclass
class VisibilitySegment:
    start_t: float
    end_t: float

    def contains(self, t: float) -> bool:
        return self.start_t <= t <= self.end_t


@dataclass
class OtfTrack:
    video_id: str
    instance_id: int
    class_id: int
    samples: list[PointSample] = field(default_factory=list)
    segments: list[VisibilitySegment] = field(default_factory=list)
    playback_speed: float = 0.2


@dataclass
class BoxKeyframe:
    media_t: float
    box: Box


@dataclass
class BoxTrack:
    video_id: str
    instance_id: int
    class_id: int
    keyframes: list[BoxKeyframe] = field(default_factory=list)
    segments: list[VisibilitySegment] = field(default_factory=list)


@dataclass
class FrameAnnotation:
    video_id: str
    frame_idx: int
    point: tuple[float, float] | None = None
    box: Box | None = None
    source: str = "human_point"


@dataclass
class Dataset:
    videos: list[VideoMeta] = field(default_factory=list)
    otf_tracks: dict[str, list[OtfTrack]] = field(default_factory=dict)
    box_tracks: dict[str, list[BoxTrack]] = field(default_factory=dict)
    split: dict[str, str] = field(default_factory=dict)

    def meta(self, video_id: str) -> VideoMeta:
        for m in self.videos:
            if m.video_id == video_id:
                return m
        raise KeyError(video_id)

    def split_videos(self, label: str) -> list[str]:
        return [m.video_id for m in self.videos if self.split.get(m.video_id) == label]


# ---------------------------------------------------------------------------
# validation

def _validate_segments(segments: Sequence[VisibilitySegment]) -> list[str]:
    v = []
    for i, seg in enumerate(segments):
        if seg.start_t >= seg.end_t:
            v.append(f"empty_segment@{i}")
        if i > 0 and seg.start_t < segments[i - 1].start_t:
            v.append(f"segment_order@{i}")
        # touching is allowed; overlap is not
        if i > 0 and seg.start_t < segments[i - 1].end_t:
            v.append(f"segment_overlap@{i}")
    return v


def validate_track(track: OtfTrack | BoxTrack, meta: VideoMeta | None = None) -> list[str]:
    """Check a track against its type invariants.

    Returns one ``name@index`` entry per violation; an empty list means the
    track is well-formed. Violations are data, not errors, so partially
    broken inputs can still be examined.
    """
    v = _validate_segments(track.segments)
    if isinstance(track, OtfTrack):
        for i, s in enumerate(track.samples):
            if i > 0 and s.media_t <= track.samples[i - 1].media_t:
                v.append(f"non_monotonic_time@{i}")
            if not any(seg.contains(s.media_t) for seg in track.segments):
                v.append(f"sample_outside_segment@{i}")
            if meta is not None and not (0 <= s.x < meta.width and 0 <= s.y < meta.height):
                v.append(f"point_out_of_frame@{i}")
        if track.playback_speed <= 0:
            v.append("nonpositive_playback_speed")
    else:
        for i, kf in enumerate(track.keyframes):
            if i > 0 and kf.media_t <= track.keyframes[i - 1].media_t:
                v.append(f"non_monotonic_time@{i}")
            if not box_is_valid(kf.box):
                v.append(f"invalid_box@{i}")
            if not any(seg.contains(kf.media_t) for seg in track.segments):
                v.append(f"keyframe_outside_segment@{i}")
            if meta is not None:
                x0, y0, x1, y1 = kf.box
                if x0 < 0 or y0 < 0 or x1 > meta.width or y1 > meta.height:
                    v.append(f"box_out_of_frame@{i}")
        for i, seg in enumerate(track.segments):
            if not any(seg.contains(kf.media_t) for kf in track.keyframes):
                v.append(f"segment_without_keyframe@{i}")
    return v


def validate_dataset(ds: Dataset) -> list[str]:
    v = []
    ids = [m.video_id for m in ds.videos]
    if len(set(ids)) != len(ids):
        v.append("duplicate_video_id")
    known = set(ids)
    for vid, label in ds.split.items():
        if vid not in known:
            v.append(f"split_unknown_video@{vid}")
        if label not in SPLIT_LABELS:
            v.append(f"split_unknown_label@{vid}")
    for vid in known:
        if vid not in ds.split and ds.split:
            v.append(f"split_missing_video@{vid}")
    for vid, tracks in list(ds.otf_tracks.items()) + list(ds.box_tracks.items()):
        if vid not in known:
            v.append(f"track_unknown_video@{vid}")
            continue
        meta = ds.meta(vid)
        for t in tracks:
            if t.video_id != vid:
                v.append(f"track_video_mismatch@{vid}")
            v.extend(f"{x}:{vid}" for x in validate_track(t, meta))
    return v


# ---------------------------------------------------------------------------
# JSON emit/parse
#
# Times must be written with at least six decimal digits. repr() already
# gives the shortest exact decimal for a float, so padding it with zeros
# keeps round-trips exact; we emit every float that way for uniformity.

def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value in annotation document")
    r = repr(float(x))
    if "e" in r or "E" in r:
        return r
    whole, _, frac = r.partition(".")
    if len(frac) < 6:
        frac = frac.ljust(6, "0")
    return f"{whole}.{frac}"


def dumps(obj: Any) -> str:
    """Serialize to compact JSON with the float rule above."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, val) in enumerate(obj.items()):
            if i:
                out.append(", ")
            if not isinstance(k, str):
                raise TypeError(f"non-string key {k!r}")
            out.append(json.dumps(k))
            out.append(": ")
            _emit(val, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


# dict forms -----------------------------------------------------------------

def meta_to_dict(m: VideoMeta) -> dict:
    return {
        "video_id": m.video_id,
        "fps": float(m.fps),
        "frame_count": m.frame_count,
        "width": m.width,
        "height": m.height,
        "duration_s": float(m.duration_s),
    }


def meta_from_dict(d: dict) -> VideoMeta:
    try:
        return VideoMeta(
            video_id=d["video_id"],
            fps=float(d["fps"]),
            frame_count=int(d["frame_count"]),
            width=int(d["width"]),
            height=int(d["height"]),
            duration_s=float(d["duration_s"]) if d.get("duration_s") is not None else None,
        )
    except KeyError as e:
        raise DecodeError(f"meta missing field {e}") from e


def _box_from(d: Any) -> Box:
    if not isinstance(d, (list, tuple)) or len(d) != 4:
        raise DecodeError(f"box must be a 4-element array, got {d!r}")
    return (float(d[0]), float(d[1]), float(d[2]), float(d[3]))


def track_to_dict(track: OtfTrack | BoxTrack) -> dict:
    base = {
        "video_id": track.video_id,
        "instance_id": track.instance_id,
        "class_id": track.class_id,
    }
    if isinstance(track, OtfTrack):
        base["samples"] = [
            {"media_t": s.media_t, "x": s.x, "y": s.y, "wall_t": s.wall_t}
            for s in track.samples
        ]
        base["segments"] = [{"start_t": s.start_t, "end_t": s.end_t} for s in track.segments]
        base["playback_speed"] = track.playback_speed
    else:
        base["keyframes"] = [
            {"media_t": k.media_t, "box": list(k.box)} for k in track.keyframes
        ]
        base["segments"] = [{"start_t": s.start_t, "end_t": s.end_t} for s in track.segments]
    return base


def _segments_from(items: Iterable[dict]) -> list[VisibilitySegment]:
    return [VisibilitySegment(float(s["start_t"]), float(s["end_t"])) for s in items]


def otf_track_from_dict(d: dict) -> OtfTrack:
    try:
        return OtfTrack(
            video_id=d["video_id"],
            instance_id=int(d["instance_id"]),
            class_id=int(d["class_id"]),
            samples=[
                PointSample(float(s["media_t"]), float(s["x"]), float(s["y"]), float(s["wall_t"]))
                for s in d.get("samples", [])
            ],
            segments=_segments_from(d.get("segments", [])),
            playback_speed=float(d.get("playback_speed", 0.2)),
        )
    except KeyError as e:
        raise DecodeError(f"otf track missing field {e}") from e


def box_track_from_dict(d: dict) -> BoxTrack:
    try:
        return BoxTrack(
            video_id=d["video_id"],
            instance_id=int(d["instance_id"]),
            class_id=int(d["class_id"]),
            keyframes=[
                BoxKeyframe(float(k["media_t"]), _box_from(k["box"])) for k in d.get("keyframes", [])
            ],
            segments=_segments_from(d.get("segments", [])),
        )
    except KeyError as e:
        raise DecodeError(f"box track missing field {e}") from e


def video_doc_to_dict(meta: VideoMeta, otf: Sequence[OtfTrack] = (), box: Sequence[BoxTrack] = ()) -> dict:
    return {
        "meta": meta_to_dict(meta),
        "otf_tracks": [track_to_dict(t) for t in otf],
        "box_tracks": [track_to_dict(t) for t in box],
    }


def dumps_video_doc(meta: VideoMeta, otf: Sequence[OtfTrack] = (), box: Sequence[BoxTrack] = ()) -> str:
    return dumps(video_doc_to_dict(meta, otf, box))


def parse_video_doc(text: str) -> tuple[VideoMeta, list[OtfTrack], list[BoxTrack]]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise DecodeError(str(e), line=e.lineno) from e
    if not isinstance(d, dict) or "meta" not in d:
        raise DecodeError("annotation document must be an object with a 'meta' field")
    meta = meta_from_dict(d["meta"])
    otf = [otf_track_from_dict(t) for t in d.get("otf_tracks", [])]
    box = [box_track_from_dict(t) for t in d.get("box_tracks", [])]
    return meta, otf, box


def dumps_dataset_index(ds: Dataset) -> str:
    return dumps({"videos": [meta_to_dict(m) for m in ds.videos], "split": dict(ds.split)})


def parse_dataset_index(text: str) -> Dataset:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise DecodeError(str(e), line=e.lineno) from e
    videos = [meta_from_dict(m) for m in d.get("videos", [])]
    split = {str(k): str(v) for k, v in d.get("split", {}).items()}
    return Dataset(videos=videos, split=split)
