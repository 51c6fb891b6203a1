"""Detection scoring (IoU, AP@50), point-to-box teachers and the file-based
pseudo-label exchange used to hand annotations to external teacher models
and pull their boxes back in."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .model import (
    Box,
    Dataset,
    DecodeError,
    FrameAnnotation,
    box_area,
    box_center,
    box_is_valid,
    clip_box,
    dumps,
)
from . import session as _session


class EvalError(ValueError):
    pass


@dataclass
class Detection:
    frame_idx: Hashable
    box: Box
    score: float
    class_id: int = 0


@dataclass
class PseudoLabel:
    video_id: str
    frame_idx: int
    instance_id: int
    class_id: int
    box: Box
    source_point: tuple[float, float]
    teacher_id: str


@dataclass
class EvalReport:
    ap50: float
    n_gt: int
    n_det: int
    pr_curve: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ap50": self.ap50,
            "n_gt": self.n_gt,
            "n_det": self.n_det,
            "pr_curve": [[r, p] for r, p in self.pr_curve],
        }


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (box_area(a) + box_area(b) - inter)


def ap50(
    gts: Mapping[Hashable, Sequence[Box]],
    dets: Sequence[Detection],
    iou_threshold: float = 0.5,
    interpolation: str = "all_point",
) -> EvalReport:
    """Average precision at IoU >= iou_threshold for a single class.

    Detections are ranked by descending score (ties keep input order) and
    greedily matched to the unmatched ground-truth box of highest IoU in
    the same frame. AP integrates the precision envelope over recall
    ("all_point"); "101_point" samples recall at 0, 0.01, ..., 1 instead
    for parity with the common COCO tooling.
    """
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        raise EvalError("AP is undefined with zero ground-truth boxes")
    if not dets:
        return EvalReport(ap50=0.0, n_gt=n_gt, n_det=0, pr_curve=[])
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    matched: dict[Hashable, list[bool]] = {k: [False] * len(v) for k, v in gts.items()}
    tp = 0
    fp = 0
    curve: list[tuple[float, float]] = []
    flags: list[bool] = []
    for i in order:
        det = dets[i]
        frame_gts = gts.get(det.frame_idx, ())
        best_iou = 0.0
        best_j = -1
        for j, g in enumerate(frame_gts):
            if matched[det.frame_idx][j]:
                continue
            v = iou(det.box, g)
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou >= iou_threshold:
            matched[det.frame_idx][best_j] = True
            tp += 1
            flags.append(True)
        else:
            fp += 1
            flags.append(False)
        curve.append((tp / n_gt, tp / (tp + fp)))
    if interpolation == "all_point":
        ap = _ap_all_point(curve)
    elif interpolation == "101_point":
        ap = _ap_101_point(curve)
    else:
        raise EvalError(f"unknown interpolation {interpolation!r}")
    return EvalReport(ap50=ap, n_gt=n_gt, n_det=len(dets), pr_curve=curve)


def _envelope(curve: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    env = []
    best = 0.0
    for r, p in reversed(curve):
        best = max(best, p)
        env.append((r, best))
    env.reverse()
    return env


def _ap_all_point(curve: Sequence[tuple[float, float]]) -> float:
    env = _envelope(curve)
    ap = 0.0
    prev_r = 0.0
    for r, p in env:
        ap += (r - prev_r) * p
        prev_r = r
    return ap


def _ap_101_point(curve: Sequence[tuple[float, float]]) -> float:
    env = _envelope(curve)
    total = 0.0
    for k in range(101):
        r = k / 100.0
        total += next((p for rr, p in env if rr >= r - 1e-12), 0.0)
    return total / 101.0


# ---------------------------------------------------------------------------
# teachers

def _point_box_distance(point: tuple[float, float], box: Box) -> float:
    dx = max(box[0] - point[0], 0.0, point[0] - box[2])
    dy = max(box[1] - point[1], 0.0, point[1] - box[3])
    return math.hypot(dx, dy)


@dataclass
class ExchangeRow:
    """One weakly annotated frame as shipped to a point-to-box teacher."""

    video_id: str
    frame_idx: int
    instance_id: int
    class_id: int
    point: tuple[float, float]


def oracle_teacher(
    rows: Sequence[ExchangeRow],
    gt: Mapping[tuple[str, int], Sequence[Box]],
    jitter_frac: float = 0.0,
    rng: random.Random | None = None,
) -> list[PseudoLabel]:
    """Ground-truth-backed stand-in for a trained point-to-box teacher.

    Each point gets the GT box that contains it (nearest box center when
    several do, nearest box when none does). ``jitter_frac`` translates the
    emitted box by up to that fraction of its own dimensions per axis, for
    degradation studies; 0 reproduces GT exactly.
    """
    if jitter_frac < 0:
        raise EvalError("jitter_frac must be >= 0")
    rng = rng or random.Random(0)
    out = []
    for row in rows:
        boxes = gt.get((row.video_id, row.frame_idx))
        if not boxes:
            raise EvalError(f"no ground truth for frame {(row.video_id, row.frame_idx)}")
        containing = [b for b in boxes if b[0] <= row.point[0] <= b[2] and b[1] <= row.point[1] <= b[3]]
        pool = containing if containing else list(boxes)
        if containing:
            box = min(pool, key=lambda b: _dist2(row.point, box_center(b)))
        else:
            box = min(pool, key=lambda b: _point_box_distance(row.point, b))
        if jitter_frac > 0:
            w = box[2] - box[0]
            h = box[3] - box[1]
            dx = rng.uniform(-jitter_frac, jitter_frac) * w
            dy = rng.uniform(-jitter_frac, jitter_frac) * h
            box = (box[0] + dx, box[1] + dy, box[2] + dx, box[3] + dy)
        out.append(
            PseudoLabel(
                video_id=row.video_id,
                frame_idx=row.frame_idx,
                instance_id=row.instance_id,
                class_id=row.class_id,
                box=box,
                source_point=row.point,
                teacher_id="oracle",
            )
        )
    return out


def _dist2(a: tuple[float, float], b: tuple[float, float]) -> float:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def heuristic_teacher(
    rows: Sequence[ExchangeRow],
    prior_size: tuple[float, float],
    frame_sizes: Mapping[str, tuple[float, float]],
) -> list[PseudoLabel]:
    """GT-free baseline teacher: a fixed-size box centered on each point,
    clipped to the frame."""
    pw, ph = prior_size
    if pw <= 0 or ph <= 0:
        raise EvalError("prior_size must be positive")
    out = []
    for row in rows:
        fw, fh = frame_sizes[row.video_id]
        raw = (row.point[0] - pw / 2, row.point[1] - ph / 2, row.point[0] + pw / 2, row.point[1] + ph / 2)
        box = clip_box(raw, fw, fh)
        if box is None:
            raise EvalError(f"point {row.point} outside frame for {row.video_id}")
        out.append(
            PseudoLabel(
                video_id=row.video_id,
                frame_idx=row.frame_idx,
                instance_id=row.instance_id,
                class_id=row.class_id,
                box=box,
                source_point=row.point,
                teacher_id="heuristic",
            )
        )
    return out


# ---------------------------------------------------------------------------
# exchange files

def export_weak_frames(dataset: Dataset, stride: int = 1) -> list[ExchangeRow]:
    """Frame-level point rows for every weakly annotated training video.

    Aligns each point track onto the frame grid (sample-and-hold), then
    keeps every ``stride``-th frame.
    """
    weak = dataset.split_videos("train_weak") if dataset.split else [m.video_id for m in dataset.videos]
    rows: list[ExchangeRow] = []
    for vid in weak:
        meta = dataset.meta(vid)
        for track in dataset.otf_tracks.get(vid, []):
            annos = _session.subsample_frames(_session.align_to_frames(track, meta), stride)
            rows.extend(
                ExchangeRow(
                    video_id=vid,
                    frame_idx=a.frame_idx,
                    instance_id=track.instance_id,
                    class_id=track.class_id,
                    point=a.point,
                )
                for a in annos
            )
    return rows


def dumps_exchange(rows: Sequence[ExchangeRow]) -> str:
    return dumps(
        {
            "frames": [
                {
                    "video_id": r.video_id,
                    "frame_idx": r.frame_idx,
                    "instance_id": r.instance_id,
                    "class_id": r.class_id,
                    "point": [r.point[0], r.point[1]],
                }
                for r in rows
            ]
        }
    )


def parse_exchange(text: str) -> list[ExchangeRow]:
    d = _load_json(text)
    rows = []
    for i, f in enumerate(d.get("frames", [])):
        try:
            rows.append(
                ExchangeRow(
                    video_id=f["video_id"],
                    frame_idx=int(f["frame_idx"]),
                    instance_id=int(f["instance_id"]),
                    class_id=int(f["class_id"]),
                    point=(float(f["point"][0]), float(f["point"][1])),
                )
            )
        except (KeyError, IndexError, TypeError) as e:
            raise DecodeError(f"bad exchange frame: {e}", line=i + 1) from e
    return rows


def dumps_pseudo_labels(labels: Sequence[PseudoLabel]) -> str:
    return dumps(
        {
            "frames": [
                {
                    "video_id": p.video_id,
                    "frame_idx": p.frame_idx,
                    "instance_id": p.instance_id,
                    "class_id": p.class_id,
                    "point": [p.source_point[0], p.source_point[1]],
                    "box": list(p.box),
                    "teacher_id": p.teacher_id,
                }
                for p in labels
            ]
        }
    )


def parse_pseudo_labels(text: str) -> list[PseudoLabel]:
    d = _load_json(text)
    out = []
    for i, f in enumerate(d.get("frames", [])):
        try:
            out.append(
                PseudoLabel(
                    video_id=f["video_id"],
                    frame_idx=int(f["frame_idx"]),
                    instance_id=int(f["instance_id"]),
                    class_id=int(f["class_id"]),
                    box=tuple(float(v) for v in f["box"]),
                    source_point=(float(f["point"][0]), float(f["point"][1])),
                    teacher_id=str(f.get("teacher_id", "")),
                )
            )
        except (KeyError, IndexError, TypeError) as e:
            raise DecodeError(f"bad pseudo-label frame: {e}", line=i + 1) from e
    return out


def _load_json(text: str) -> dict:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise DecodeError(str(e), line=e.lineno) from e
    if not isinstance(d, dict):
        raise DecodeError("expected a JSON object")
    return d


def import_pseudo_labels(
    labels: Sequence[PseudoLabel],
    exported: Sequence[ExchangeRow],
) -> tuple[list[FrameAnnotation], list[str]]:
    """Attach teacher boxes back onto the weak frames they were made for.

    Every label must reference a (video, frame, instance) that was exported;
    a pseudo box that does not contain its own source point is suspicious
    (the teacher wandered off the prior) and is reported as a warning but
    kept, since teachers are not filtered by default.
    """
    known = {(r.video_id, r.frame_idx, r.instance_id) for r in exported}
    annos = []
    warnings_out = []
    for p in labels:
        key = (p.video_id, p.frame_idx, p.instance_id)
        if key not in known:
            raise EvalError(f"pseudo label references unknown frame {key}")
        if not box_is_valid(p.box):
            raise EvalError(f"pseudo label with invalid box at {key}")
        x, y = p.source_point
        if not (p.box[0] <= x <= p.box[2] and p.box[1] <= y <= p.box[3]):
            warnings_out.append(f"box_excludes_point@{p.video_id}:{p.frame_idx}:{p.instance_id}")
        annos.append(
            FrameAnnotation(
                video_id=p.video_id,
                frame_idx=p.frame_idx,
                point=p.source_point,
                box=p.box,
                source="pseudo_box",
            )
        )
    return annos, warnings_out


def box_frames(dataset: Dataset, stride: int = 1) -> list[FrameAnnotation]:
    """Interpolated human boxes on the frame grid of box-level videos."""
    vids = dataset.split_videos("train_box") if dataset.split else [m.video_id for m in dataset.videos]
    out = []
    for vid in vids:
        meta = dataset.meta(vid)
        for track in dataset.box_tracks.get(vid, []):
            for frame_idx in range(0, meta.frame_count, stride):
                box = _session.interpolate_box(track, frame_idx / meta.fps)
                if box is not None:
                    out.append(
                        FrameAnnotation(
                            video_id=vid, frame_idx=frame_idx, box=box, source="human_box"
                        )
                    )
    return out


def merge_training_frames(
    dataset: Dataset, pseudo: Sequence[FrameAnnotation], stride: int = 1
) -> list[FrameAnnotation]:
    """Box-level frames plus imported pseudo-box frames, ready for export."""
    return box_frames(dataset, stride) + list(pseudo)


# ---------------------------------------------------------------------------
# COCO export

def export_coco(
    metas: Mapping[str, "object"],
    frames: Sequence[FrameAnnotation],
    class_names: Mapping[int, str] | None = None,
) -> tuple[dict, list[str]]:
    """COCO-style detection JSON (boxes as [x, y, width, height]).

    Image and annotation ids are assigned in sorted (video_id, frame_idx)
    order so repeated exports are identical. Frames without a box cannot be
    detection training data; they are skipped and reported.
    """
    skipped = [f"{a.video_id}:{a.frame_idx}" for a in frames if a.box is None]
    boxed = [a for a in frames if a.box is not None]
    keys = sorted({(a.video_id, a.frame_idx) for a in boxed})
    image_ids = {k: i + 1 for i, k in enumerate(keys)}
    images = []
    for (vid, frame_idx), img_id in image_ids.items():
        meta = metas[vid]
        images.append(
            {
                "id": img_id,
                "file_name": f"{vid}/frame_{frame_idx:06d}.jpg",
                "width": meta.width,
                "height": meta.height,
            }
        )
    annotations = []
    for i, a in enumerate(sorted(boxed, key=lambda a: (a.video_id, a.frame_idx))):
        x0, y0, x1, y1 = a.box
        annotations.append(
            {
                "id": i + 1,
                "image_id": image_ids[(a.video_id, a.frame_idx)],
                "category_id": 0,
                "bbox": [x0, y0, x1 - x0, y1 - y0],
                "area": (x1 - x0) * (y1 - y0),
                "iscrowd": 0,
            }
        )
    categories = [{"id": 0, "name": (class_names or {}).get(0, "object")}]
    return {"images": images, "annotations": annotations, "categories": categories}, skipped
