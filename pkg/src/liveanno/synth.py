"""Synthetic moving-object scenes with exact ground truth, simulated point
and box annotators with timing/noise models, and the budget-matched
experiment runner.

Everything is driven by explicit seeds: the same spec and seed always
produce byte-identical tracks, logs and reports.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, asdict
from statistics import mean, stdev
from typing import Sequence

from .model import Box, BoxTrack, OtfTrack, VideoMeta, box_center, media_to_frame
from .session import (
    SessionEvent,
    SessionLog,
    SessionState,
    align_to_frames,
    interpolate_box,
    subsample_frames,
)
from .analysis import BudgetModel, budget_otf, match_budget, split_plan
from .evalbridge import Detection, ExchangeRow, ap50, heuristic_teacher, oracle_teacher


class SceneError(ValueError):
    pass


@dataclass
class ObjectSpec:
    """One moving object. Unset motion fields are drawn from the scene seed."""

    trajectory: str = "linear"  # linear | sinusoidal | random_walk
    size: tuple[float, float] = (40.0, 40.0)
    start: tuple[float, float] | None = None
    velocity: tuple[float, float] | None = None  # px per frame (linear)
    amplitude: tuple[float, float] | None = None  # px (sinusoidal)
    period_s: float = 4.0
    step_sigma: float = 1.0  # px per frame (random walk)
    visibility: list[tuple[float, float]] | None = None  # media seconds


@dataclass
class SceneSpec:
    n_objects: int = 1
    duration_s: float = 10.0
    fps: float = 25.0
    width: int = 640
    height: int = 480
    seed: int = 0
    objects: list[ObjectSpec] = field(default_factory=list)
    video_id: str = "scene"


@dataclass
class Scene:
    spec: SceneSpec
    meta: VideoMeta
    # gt[instance][frame_idx] -> box, only for frames inside a visibility window
    gt: dict[int, dict[int, Box]]
    visibility: dict[int, list[tuple[float, float]]]

    def gt_by_frame(self) -> dict[tuple[str, int], list[Box]]:
        out: dict[tuple[str, int], list[Box]] = {}
        for boxes in self.gt.values():
            for frame_idx, box in boxes.items():
                out.setdefault((self.meta.video_id, frame_idx), []).append(box)
        return out


def generate_scene(spec: SceneSpec) -> Scene:
    """Deterministic per-frame ground truth for a synthetic clip.

    Object centers follow the requested trajectory, clamped so boxes stay
    fully inside the frame (which keeps the visible-fraction invariant with
    margin). An object that cannot fit in the frame is an error.
    """
    rng = random.Random(spec.seed)
    frame_count = int(round(spec.duration_s * spec.fps))
    if frame_count < 1:
        raise SceneError("scene needs at least one frame")
    meta = VideoMeta(
        video_id=spec.video_id,
        fps=spec.fps,
        frame_count=frame_count,
        width=spec.width,
        height=spec.height,
        duration_s=spec.duration_s,
    )
    objects = list(spec.objects)
    while len(objects) < spec.n_objects:
        objects.append(ObjectSpec())
    gt: dict[int, dict[int, Box]] = {}
    visibility: dict[int, list[tuple[float, float]]] = {}
    for instance, obj in enumerate(objects[: spec.n_objects]):
        w, h = obj.size
        if w <= 0 or h <= 0 or w > spec.width or h > spec.height:
            raise SceneError(f"object {instance} size {obj.size} does not fit the frame")
        lo_x, hi_x = w / 2, spec.width - w / 2
        lo_y, hi_y = h / 2, spec.height - h / 2
        start = obj.start or (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
        velocity = obj.velocity if obj.velocity is not None else (rng.uniform(-2, 2), rng.uniform(-2, 2))
        amplitude = obj.amplitude or (rng.uniform(10, 60), rng.uniform(10, 60))
        windows = obj.visibility if obj.visibility is not None else [(0.0, spec.duration_s)]
        prev_end = None
        for a, b in windows:
            if not (0 <= a < b <= spec.duration_s + 1e-9):
                raise SceneError(f"bad visibility window ({a}, {b})")
            if prev_end is not None and a < prev_end:
                raise SceneError("visibility windows must be disjoint and sorted")
            prev_end = b
        visibility[instance] = [(float(a), float(b)) for a, b in windows]
        walk_x, walk_y = start
        boxes: dict[int, Box] = {}
        for frame_idx in range(frame_count):
            if obj.trajectory == "linear":
                cx = start[0] + velocity[0] * frame_idx
                cy = start[1] + velocity[1] * frame_idx
            elif obj.trajectory == "sinusoidal":
                phase = 2 * math.pi * (frame_idx / spec.fps) / obj.period_s
                cx = start[0] + amplitude[0] * math.sin(phase)
                cy = start[1] + amplitude[1] * math.sin(2 * phase)
            elif obj.trajectory == "random_walk":
                walk_x += rng.gauss(0.0, obj.step_sigma)
                walk_y += rng.gauss(0.0, obj.step_sigma)
                cx, cy = walk_x, walk_y
            else:
                raise SceneError(f"unknown trajectory {obj.trajectory!r}")
            cx = min(max(cx, lo_x), hi_x)
            cy = min(max(cy, lo_y), hi_y)
            t_f = frame_idx / spec.fps
            if any(a <= t_f <= b for a, b in visibility[instance]):
                boxes[frame_idx] = (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
        if not boxes:
            raise SceneError(f"object {instance} is never visible on the frame grid")
        gt[instance] = boxes
    return Scene(spec=spec, meta=meta, gt=gt, visibility=visibility)


# ---------------------------------------------------------------------------
# simulated annotators

@dataclass
class SimAnnotatorSpec:
    """Noise and cost model for the simulated expert."""

    sampling_hz: float = 60.0
    reaction_lag_s: float = 0.3  # wall-clock pointer lag
    jitter_frac: float = 0.25  # of box dims, truncated at the same value
    playback_speed: float = 0.2
    bbox_keyframe_period_s: float = 1.0  # media seconds between keyframes
    pause_s: float = 4.0
    corner_click_s: float = 2.3
    navigate_s: float = 5.0

    def validate(self) -> None:
        vals = [self.sampling_hz, self.playback_speed, self.bbox_keyframe_period_s]
        if any(v <= 0 for v in vals):
            raise SceneError("sampling_hz, playback_speed and keyframe period must be > 0")
        if min(self.reaction_lag_s, self.jitter_frac, self.pause_s, self.corner_click_s, self.navigate_s) < 0:
            raise SceneError("costs, lag and jitter must be >= 0")
        if self.jitter_frac >= 0.5:
            raise SceneError("jitter_frac must stay below 0.5 so points stay inside boxes")


def _truncated_gauss(rng: random.Random, sigma: float, bound: float) -> float:
    """Gaussian rejection-sampled into [-bound, bound]."""
    if bound == 0 or sigma == 0:
        return 0.0
    while True:
        v = rng.gauss(0.0, sigma)
        if -bound <= v <= bound:
            return v


def _gt_box_at(scene: Scene, instance: int, media_t: float) -> Box:
    boxes = scene.gt[instance]
    frame_idx = media_to_frame(media_t, scene.meta.fps)
    if frame_idx in boxes:
        return boxes[frame_idx]
    # frame rounding can land just outside a window; take the nearest GT frame
    return boxes[min(boxes, key=lambda f: abs(f - frame_idx))]


def _center_at(scene: Scene, instance: int, media_t: float, window: tuple[float, float]) -> tuple[float, float]:
    t = min(max(media_t, window[0]), window[1])
    return box_center(_gt_box_at(scene, instance, t))


def simulate_otf(
    scene: Scene, annot: SimAnnotatorSpec, instance_id: int = 0, seed: int = 0
) -> tuple[OtfTrack, SessionLog]:
    """Drive a point-annotation session for one object of a scene.

    The cursor runs at ``sampling_hz`` in wall time and points at the
    object's center as it was ``reaction_lag_s`` of wall time ago (lag times
    speed in media time: slowed playback shrinks the tracking error), plus
    truncated Gaussian jitter scaled by the box dimensions. The annotator
    pauses the video to stop the annotation exactly when the object
    disappears and again to re-acquire it when it reappears; each such
    mid-video stoppage costs ``pause_s`` of wall time. Events are stamped
    with exact media times the way a real client stamps from its decoder.
    """
    annot.validate()
    if instance_id not in scene.gt:
        raise SceneError(f"scene has no object {instance_id}")
    rng = random.Random(seed)
    speed = annot.playback_speed
    state = SessionState(scene.meta.video_id, "OTF", speed, instance_id=instance_id)
    windows = scene.visibility[instance_id]
    duration = scene.spec.duration_s

    wall = 0.0  # wall time at which media position equals `media_mark`
    media_mark = 0.0
    state.apply(SessionEvent(wall_t=0.0, kind="play", media_t=0.0))

    def wall_for(media: float) -> float:
        return wall + (media - media_mark) / speed

    for wi, (a, b) in enumerate(windows):
        w_a = wall_for(a)
        if a > 0:
            state.apply(SessionEvent(wall_t=w_a, kind="pause", media_t=a))
            state.apply(SessionEvent(wall_t=w_a, kind="begin_annotation", media_t=a))
            w_a += annot.pause_s  # re-acquisition cost
            state.apply(SessionEvent(wall_t=w_a, kind="play", media_t=a))
        else:
            state.apply(SessionEvent(wall_t=w_a, kind="begin_annotation", media_t=a))
        wall, media_mark = w_a, a
        w_b = wall_for(b)
        tick = math.floor(wall * annot.sampling_hz) + 1
        while tick / annot.sampling_hz < w_b:
            w_t = tick / annot.sampling_hz
            media = media_mark + (w_t - wall) * speed
            cx, cy = _center_at(scene, instance_id, media - annot.reaction_lag_s * speed, (a, b))
            gt_box = _gt_box_at(scene, instance_id, min(max(media, a), b))
            bw = gt_box[2] - gt_box[0]
            bh = gt_box[3] - gt_box[1]
            x = cx + _truncated_gauss(rng, annot.jitter_frac * bw, annot.jitter_frac * bw)
            y = cy + _truncated_gauss(rng, annot.jitter_frac * bh, annot.jitter_frac * bh)
            state.apply(SessionEvent(wall_t=w_t, kind="cursor", x=x, y=y, media_t=media))
            tick += 1
        state.apply(SessionEvent(wall_t=w_b, kind="pause", media_t=b))
        state.apply(SessionEvent(wall_t=w_b, kind="stop_annotation", media_t=b))
        wall, media_mark = w_b, b
        if b < duration:
            if wi + 1 < len(windows):
                wall += annot.pause_s  # stoppage cost before searching on
            state.apply(SessionEvent(wall_t=wall, kind="play", media_t=b))
    if media_mark < duration:
        w_end = wall_for(duration)
        state.apply(SessionEvent(wall_t=w_end, kind="pause", media_t=duration))
        wall = w_end
    state.apply(SessionEvent(wall_t=wall, kind="end_session"))
    track, _ = state.finalize()
    return track, state.build_log()


def simulate_bbox(
    scene: Scene,
    annot: SimAnnotatorSpec,
    instance_id: int = 0,
    corner_jitter_px: float = 0.0,
    seed: int = 0,
) -> tuple[BoxTrack, SessionLog]:
    """Drive a keyframed box session for one object of a scene.

    The annotator traverses the video once at normal speed and, every
    ``bbox_keyframe_period_s`` of media time inside a visibility window
    (plus the window end), pauses, clicks the two corners of the
    ground-truth box (optionally jittered) and navigates onward. Each
    keyframe costs pause_s + 2*corner_click_s + navigate_s of wall time on
    top of the traversal, which is what makes this method slow.
    """
    annot.validate()
    if instance_id not in scene.gt:
        raise SceneError(f"scene has no object {instance_id}")
    rng = random.Random(seed)
    state = SessionState(scene.meta.video_id, "BBox", 1.0, instance_id=instance_id)
    windows = scene.visibility[instance_id]
    duration = scene.spec.duration_s
    kf_cost = annot.pause_s + 2 * annot.corner_click_s + annot.navigate_s

    wall = 0.0
    media_mark = 0.0
    state.apply(SessionEvent(wall_t=0.0, kind="play", media_t=0.0))

    def wall_for(media: float) -> float:
        return wall + (media - media_mark)

    for a, b in windows:
        w_a = wall_for(a)
        state.apply(SessionEvent(wall_t=w_a, kind="begin_annotation", media_t=a))
        wall, media_mark = w_a, a
        times = []
        t = a
        while t < b - 1e-9:
            times.append(t)
            t += annot.bbox_keyframe_period_s
        times.append(b)
        for kf_t in times:
            w_t = wall_for(kf_t)
            state.apply(SessionEvent(wall_t=w_t, kind="pause", media_t=kf_t))
            box = _gt_box_at(scene, instance_id, kf_t)
            if corner_jitter_px > 0:
                box = tuple(c + rng.uniform(-corner_jitter_px, corner_jitter_px) for c in box)
            w_t += kf_cost
            state.apply(SessionEvent(wall_t=w_t, kind="set_keyframe", box=box, media_t=kf_t))
            wall, media_mark = w_t, kf_t
            if kf_t < b:
                state.apply(SessionEvent(wall_t=wall, kind="play", media_t=kf_t))
        # paused at the window end after its last keyframe
        state.apply(SessionEvent(wall_t=wall, kind="stop_annotation", media_t=b))
        if b < duration:
            state.apply(SessionEvent(wall_t=wall, kind="play", media_t=b))
    if media_mark < duration:
        w_end = wall_for(duration)
        state.apply(SessionEvent(wall_t=w_end, kind="pause", media_t=duration))
        wall = w_end
    state.apply(SessionEvent(wall_t=wall, kind="end_session"))
    track, _ = state.finalize()
    return track, state.build_log()


# ---------------------------------------------------------------------------
# experiment runner

@dataclass
class ExperimentConfig:
    n_videos: int = 40
    box_fractions: list[float] = field(default_factory=lambda: [round(0.20 + 0.05 * i, 2) for i in range(9)])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    teacher: str = "oracle"  # oracle | heuristic | imported
    budget_minutes: float | None = None  # informational target for utilization
    stride: int = 8
    scene: SceneSpec = field(default_factory=lambda: SceneSpec(duration_s=4.0, fps=10.0))
    annotator: SimAnnotatorSpec = field(default_factory=SimAnnotatorSpec)
    teacher_jitter_frac: float = 0.0
    heuristic_prior: tuple[float, float] = (40.0, 40.0)
    imported_labels_path: str | None = None

    def validate(self) -> None:
        for f in self.box_fractions:
            if not (0.20 - 1e-9 <= f <= 0.60 + 1e-9):
                raise SceneError(f"box fraction {f} outside the 0.20..0.60 sweep")
        if self.teacher not in ("oracle", "heuristic", "imported"):
            raise SceneError(f"unknown teacher {self.teacher!r}")
        if self.teacher == "imported" and not self.imported_labels_path:
            raise SceneError("imported teacher needs imported_labels_path")


@dataclass
class ExperimentCell:
    box_fraction: float
    seed: int
    b_otf_min: float = 0.0
    b_bbox_min: float = 0.0
    n_box_bbox: int = 0
    ap50_otf: float = 0.0
    ap50_bbox: float = 0.0
    error: str | None = None


@dataclass
class _BoxLabel:
    video_id: str
    frame_idx: int
    box: Box


REPORT_NOTE = (
    "Student training is replaced by direct pseudo-label quality: AP@50 of the "
    "generated labels against synthetic ground truth."
)


def _scene_for(config: ExperimentConfig, seed: int, index: int) -> Scene:
    spec = SceneSpec(
        n_objects=config.scene.n_objects,
        duration_s=config.scene.duration_s,
        fps=config.scene.fps,
        width=config.scene.width,
        height=config.scene.height,
        seed=seed * 100_003 + index,
        objects=list(config.scene.objects),
        video_id=f"video_{index:04d}",
    )
    return generate_scene(spec)


def _pooled_ap(per_frame_gt: dict, labels: Sequence) -> float:
    """AP@50 with (video, frame) keys pooled into one evaluation."""
    if not labels:
        return 0.0
    dets = [Detection(frame_idx=(p.video_id, p.frame_idx), box=p.box, score=1.0) for p in labels]
    keys = {d.frame_idx for d in dets}
    relevant = {k: v for k, v in per_frame_gt.items() if k in keys}
    if not relevant:
        return 0.0
    return ap50(relevant, dets).ap50


def run_experiment_cell(config: ExperimentConfig, box_fraction: float, seed: int) -> ExperimentCell:
    cell = ExperimentCell(box_fraction=box_fraction, seed=seed)
    scenes = [_scene_for(config, seed, i) for i in range(config.n_videos)]
    by_id = {s.meta.video_id: s for s in scenes}
    split = split_plan([s.meta.video_id for s in scenes], seed=seed, box_fraction=box_fraction)
    train_box = [v for v in sorted(by_id) if split[v] == "train_box"]
    train_weak = [v for v in sorted(by_id) if split[v] == "train_weak"]
    if not train_box or not train_weak:
        cell.error = "degenerate_split"
        return cell

    gt_all: dict[tuple[str, int], list[Box]] = {}
    for s in scenes:
        gt_all.update(s.gt_by_frame())

    t_bbox_s: list[float] = []
    bbox_tracks: dict[str, BoxTrack] = {}
    for i, vid in enumerate(train_box):
        track, log = simulate_bbox(by_id[vid], config.annotator, seed=seed * 7919 + i)
        bbox_tracks[vid] = track
        t_bbox_s.append(log.total_wall_s)
    t_otf_s: list[float] = []
    weak_rows: list[ExchangeRow] = []
    for i, vid in enumerate(train_weak):
        track, log = simulate_otf(by_id[vid], config.annotator, seed=seed * 104_729 + i)
        t_otf_s.append(log.total_wall_s)
        scene = by_id[vid]
        annos = subsample_frames(align_to_frames(track, scene.meta), config.stride)
        weak_rows.extend(
            ExchangeRow(video_id=vid, frame_idx=a.frame_idx, instance_id=track.instance_id,
                        class_id=track.class_id, point=a.point)
            for a in annos
        )

    model = BudgetModel(
        t_bbox_per_video=mean(t_bbox_s) / 60.0,
        t_otf_per_video=mean(t_otf_s) / 60.0,
        n_box_otf=len(train_box),
        n_weak_otf=len(train_weak),
    )
    cell.b_otf_min = budget_otf(model)
    matched = match_budget(model)
    cell.n_box_bbox = matched.n_box_bbox
    cell.b_bbox_min = matched.n_box_bbox * model.t_bbox_per_video

    if config.teacher == "oracle":
        labels = oracle_teacher(
            weak_rows, gt_all, jitter_frac=config.teacher_jitter_frac,
            rng=random.Random(seed * 31 + 7),
        )
    elif config.teacher == "heuristic":
        frame_sizes = {vid: (by_id[vid].meta.width, by_id[vid].meta.height) for vid in by_id}
        labels = heuristic_teacher(weak_rows, config.heuristic_prior, frame_sizes)
    else:
        from .evalbridge import parse_pseudo_labels

        with open(config.imported_labels_path, "r", encoding="utf-8") as fh:
            labels = parse_pseudo_labels(fh.read())
    cell.ap50_otf = _pooled_ap(gt_all, labels)

    # budget-matched box-only scenario: the weak-annotation time buys extra
    # box-level videos, whose labels are the interpolated keyframe boxes
    matched_videos = (train_box + train_weak)[: min(cell.n_box_bbox, len(train_box) + len(train_weak))]
    interp_labels: list[_BoxLabel] = []
    for i, vid in enumerate(matched_videos):
        track = bbox_tracks.get(vid)
        if track is None:
            track, _ = simulate_bbox(by_id[vid], config.annotator, seed=seed * 7919 + 1000 + i)
        scene = by_id[vid]
        for frame_idx in range(0, scene.meta.frame_count, config.stride):
            box = interpolate_box(track, frame_idx / scene.meta.fps)
            if box is not None:
                interp_labels.append(_BoxLabel(video_id=vid, frame_idx=frame_idx, box=box))
    cell.ap50_bbox = _pooled_ap(gt_all, interp_labels)
    return cell


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: list[ExperimentCell]
    note: str = REPORT_NOTE

    def aggregates(self) -> list[dict]:
        out = []
        for f in sorted({c.box_fraction for c in self.cells}):
            ok = [c for c in self.cells if c.box_fraction == f and c.error is None]
            if not ok:
                out.append({"box_fraction": f, "n": 0})
                continue
            ap_otf = [c.ap50_otf for c in ok]
            ap_bbox = [c.ap50_bbox for c in ok]
            out.append(
                {
                    "box_fraction": f,
                    "n": len(ok),
                    "ap50_otf_mean": mean(ap_otf),
                    "ap50_otf_sd": stdev(ap_otf) if len(ap_otf) > 1 else 0.0,
                    "ap50_bbox_mean": mean(ap_bbox),
                    "ap50_bbox_sd": stdev(ap_bbox) if len(ap_bbox) > 1 else 0.0,
                    "b_otf_min_mean": mean(c.b_otf_min for c in ok),
                    "b_bbox_min_mean": mean(c.b_bbox_min for c in ok),
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "note": self.note,
            "budget_minutes": self.config.budget_minutes,
            "cells": [asdict(c) for c in self.cells],
            "aggregates": self.aggregates(),
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["fraction", "seed", "b_otf_min", "b_bbox_min", "n_box_bbox", "ap50_otf", "ap50_bbox"])
        for c in self.cells:
            if c.error is not None:
                w.writerow([c.box_fraction, c.seed, "", "", "", "", f"error:{c.error}"])
            else:
                w.writerow([
                    c.box_fraction, c.seed, repr(c.b_otf_min), repr(c.b_bbox_min),
                    c.n_box_bbox, repr(c.ap50_otf), repr(c.ap50_bbox),
                ])
        return out.getvalue()


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Sweep (box_fraction, seed) cells; a failing cell is recorded with its
    reason and does not abort the others."""
    config.validate()
    cells = []
    for f in config.box_fractions:
        for seed in config.seeds:
            try:
                cells.append(run_experiment_cell(config, f, seed))
            except Exception as e:  # noqa: BLE001 - cell isolation is the contract
                cells.append(ExperimentCell(box_fraction=f, seed=seed, error=f"{type(e).__name__}: {e}"))
    return ExperimentReport(config=config, cells=cells)


# ---------------------------------------------------------------------------
# config file parsing (CLI surface)

def _pair(v) -> tuple[float, float] | None:
    return None if v is None else (float(v[0]), float(v[1]))


def object_spec_from_dict(d: dict) -> ObjectSpec:
    return ObjectSpec(
        trajectory=d.get("trajectory", "linear"),
        size=_pair(d.get("size")) or (40.0, 40.0),
        start=_pair(d.get("start")),
        velocity=_pair(d.get("velocity")),
        amplitude=_pair(d.get("amplitude")),
        period_s=float(d.get("period_s", 4.0)),
        step_sigma=float(d.get("step_sigma", 1.0)),
        visibility=[(float(a), float(b)) for a, b in d["visibility"]] if d.get("visibility") else None,
    )


def scene_spec_from_dict(d: dict) -> SceneSpec:
    return SceneSpec(
        n_objects=int(d.get("n_objects", max(1, len(d.get("objects", []))))),
        duration_s=float(d.get("duration_s", 10.0)),
        fps=float(d.get("fps", 25.0)),
        width=int(d.get("width", 640)),
        height=int(d.get("height", 480)),
        seed=int(d.get("seed", 0)),
        objects=[object_spec_from_dict(o) for o in d.get("objects", [])],
        video_id=str(d.get("video_id", "scene")),
    )


def annotator_spec_from_dict(d: dict) -> SimAnnotatorSpec:
    spec = SimAnnotatorSpec()
    for name in (
        "sampling_hz", "reaction_lag_s", "jitter_frac", "playback_speed",
        "bbox_keyframe_period_s", "pause_s", "corner_click_s", "navigate_s",
    ):
        if name in d:
            setattr(spec, name, float(d[name]))
    return spec


def experiment_config_from_dict(d: dict) -> ExperimentConfig:
    config = ExperimentConfig(
        scene=scene_spec_from_dict(d.get("scene", {})),
        annotator=annotator_spec_from_dict(d.get("annotator", {})),
    )
    if "n_videos" in d:
        config.n_videos = int(d["n_videos"])
    if "box_fractions" in d:
        config.box_fractions = [float(f) for f in d["box_fractions"]]
    if "seeds" in d:
        config.seeds = [int(s) for s in d["seeds"]]
    if "teacher" in d:
        config.teacher = str(d["teacher"])
    if "budget_minutes" in d and d["budget_minutes"] is not None:
        config.budget_minutes = float(d["budget_minutes"])
    if "stride" in d:
        config.stride = int(d["stride"])
    if "teacher_jitter_frac" in d:
        config.teacher_jitter_frac = float(d["teacher_jitter_frac"])
    if "heuristic_prior" in d:
        config.heuristic_prior = _pair(d["heuristic_prior"])
    if "imported_labels_path" in d:
        config.imported_labels_path = d["imported_labels_path"]
    return config


def scene_to_dict(scene: Scene) -> dict:
    return {
        "meta": {
            "video_id": scene.meta.video_id,
            "fps": scene.meta.fps,
            "frame_count": scene.meta.frame_count,
            "width": scene.meta.width,
            "height": scene.meta.height,
            "duration_s": scene.meta.duration_s,
        },
        "visibility": {str(k): [[a, b] for a, b in v] for k, v in scene.visibility.items()},
        "gt": {
            str(instance): {str(f): list(box) for f, box in sorted(frames.items())}
            for instance, frames in scene.gt.items()
        },
    }
